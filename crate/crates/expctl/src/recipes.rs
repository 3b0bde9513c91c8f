//! Built-in experiments, one `.conf` file per curve.

use crate::config;
use crate::error::{ExpError, Result};
use crate::spec::ExperimentSpec;

pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    /// `(curve, config text)` pairs.
    pub curves: &'static [(&'static str, &'static str)],
}

macro_rules! curves {
    ($recipe:literal: $($curve:literal),+ $(,)?) => {
        &[$(($curve, include_str!(concat!("../recipes/", $recipe, "/", $curve, ".conf")))),+]
    };
}

pub const RECIPES: &[Recipe] = &[
    Recipe {
        name: "fig1",
        description: "throughput against population, simulated, with the queueing plateau",
        curves: curves!("fig1": "queueing", "simulate"),
    },
    Recipe {
        name: "fig2a",
        description: "time until the swarm enters the one-club",
        curves: curves!("fig2a": "u0.5-rp_rfb", "u0.5-rp_rub", "u1-rp_rfb", "u1-rp_rub"),
    },
    Recipe {
        name: "fig2b",
        description: "time until half of the swarm leaves the one-club",
        curves: curves!("fig2b": "u0.5-rp_rfb", "u0.5-rp_rub", "u1-rp_rfb", "u1-rp_rub"),
    },
    Recipe {
        name: "fig3",
        description: "exact throughput of publisher and peer policy pairs",
        curves: curves!("fig3": "mdp_rfb-rp_rub", "mdp_rfb-rup_rub", "rp_rfb-rp_rub", "rp_rub-rp_rub"),
    },
    Recipe {
        name: "fig5a",
        description: "exact, simulated and queueing throughput with U <= mu",
        curves: curves!("fig5a": "markov", "queueing", "simulate"),
    },
    Recipe {
        name: "fig5b",
        description: "exact, simulated and queueing throughput with U > mu",
        curves: curves!("fig5b": "markov", "queueing", "simulate"),
    },
    Recipe {
        name: "fig6a",
        description: "queueing throughput against the number of blocks",
        curves: curves!("fig6a": "queueing"),
    },
    Recipe {
        name: "fig6b",
        description: "queueing throughput against publisher capacity",
        curves: curves!("fig6b": "queueing"),
    },
    Recipe {
        name: "fig7a",
        description: "queueing throughput against 1/mu' for K = 3..7",
        curves: curves!("fig7a": "k3", "k4", "k5", "k6", "k7"),
    },
    Recipe {
        name: "fig7b",
        description: "queueing throughput against U with a reduced end-game rate",
        curves: curves!("fig7b": "k3", "k4", "k5", "k6", "k7"),
    },
    Recipe {
        name: "fig8a",
        description: "shielding newcomers and reduced end-game rate, U < mu",
        curves: curves!("fig8a": "mup1-open", "mup1-shielded", "mup10-open", "mup10-shielded"),
    },
    Recipe {
        name: "fig8b",
        description: "shielding newcomers and reduced end-game rate, U > mu",
        curves: curves!("fig8b": "mup0.1-open", "mup0.1-shielded", "mup0.5-open", "mup0.5-shielded"),
    },
    Recipe {
        name: "appD",
        description: "one-club transients under the most-deprived publisher",
        curves: curves!("appD": "enter-mdp_rfb", "enter-rp_rub", "leave-mdp_rfb", "leave-rp_rub"),
    },
    Recipe {
        name: "appE",
        description: "peers lingering as seeds",
        curves: curves!("appE": "gamma1", "gamma1.2", "gamma1.5", "gamma2", "immediate-rp_rfb", "immediate-rp_rub"),
    },
];

pub fn find(name: &str) -> Result<&'static Recipe> {
    RECIPES.iter().find(|r| r.name.eq_ignore_ascii_case(name)).ok_or_else(|| ExpError::UnknownRecipe(name.into()))
}

impl Recipe {
    pub fn specs(&self) -> Result<Vec<(&'static str, ExperimentSpec)>> {
        self.curves.iter().map(|(curve, text)| Ok((*curve, config::parse(text)?))).collect()
    }
}
