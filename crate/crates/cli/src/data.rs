//! Assembles players and the matching utility function for the selected
//! dataset.

use probshap::datasets::{
    load_wine, make_synthetic_players, split_and_partition, validation_grid, PlayerDistribution,
    SyntheticSpec,
};
use probshap::utilities::{LeastSquaresUtility, NearestNeighborUtility};
use probshap::{Result, UtilityFunction};

use crate::config::{DatasetKind, ExperimentConfig};

pub struct Prepared {
    pub players: Vec<PlayerDistribution>,
    pub utility: Box<dyn UtilityFunction>,
}

pub fn synthetic_spec(config: &ExperimentConfig) -> SyntheticSpec {
    SyntheticSpec {
        n_players: config.players,
        master_seed: config.seed,
        ..SyntheticSpec::default()
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    match config.dataset {
        DatasetKind::Synthetic => {
            let spec = synthetic_spec(config);
            let players = make_synthetic_players(&spec)?;
            let validation = validation_grid(&spec, config.validation_points)?;
            Ok(Prepared {
                players,
                utility: Box::new(NearestNeighborUtility::new(&validation)?),
            })
        }
        DatasetKind::Wine => {
            let table = load_wine(&config.wine_csv_path()?)?;
            let parts = split_and_partition(&table, config.seed, 0.7)?;
            Ok(Prepared {
                utility: Box::new(LeastSquaresUtility::new(&parts.validation)?),
                players: parts.players,
            })
        }
    }
}
