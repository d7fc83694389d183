use std::fmt;

use super::ClassifyError;

/// How many candidate features a tree examines at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    /// ⌈log₂ d⌉ + 1
    Log2Plus1,
    /// Every feature.
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, dim: usize) -> usize {
        let k = match self {
            MaxFeatures::Log2Plus1 => (dim as f64).log2().ceil() as usize + 1,
            MaxFeatures::All => dim,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, dim.max(1))
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Log2Plus1 => f.write_str("log2"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            max_features: MaxFeatures::Log2Plus1,
            bootstrap: true,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenUnits {
    /// ⌈(inputs + classes) / 2⌉
    Auto,
    Fixed(usize),
}

impl HiddenUnits {
    pub fn resolve(self, inputs: usize, classes: usize) -> usize {
        match self {
            HiddenUnits::Auto => (inputs + classes).div_ceil(2),
            HiddenUnits::Fixed(h) => h,
        }
    }
}

impl fmt::Display for HiddenUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HiddenUnits::Auto => f.write_str("auto"),
            HiddenUnits::Fixed(h) => write!(f, "{h}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: HiddenUnits,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Scale inputs to zero mean and unit variance using training statistics.
    pub standardize: bool,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: HiddenUnits::Auto,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            seed: 42,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassifierSpec {
    Knn { k: usize },
    GaussianNb,
    RandomForest(ForestParams),
    Mlp(MlpParams),
}

fn invalid(msg: impl Into<String>) -> ClassifyError {
    ClassifyError::InvalidSpec(msg.into())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ClassifyError> {
    value
        .parse()
        .map_err(|_| invalid(format!("bad value {value:?} for {key}")))
}

impl ClassifierSpec {
    /// Parses one of `1nn`, `3nn`, `5nn`, `nb`, `rf`, `mlp`, taking the
    /// randomized families' seed from `seed`.
    pub fn from_name(name: &str, seed: u64) -> Result<Self, ClassifierSpecError> {
        Ok(match name {
            "1nn" => ClassifierSpec::Knn { k: 1 },
            "3nn" => ClassifierSpec::Knn { k: 3 },
            "5nn" => ClassifierSpec::Knn { k: 5 },
            "nb" => ClassifierSpec::GaussianNb,
            "rf" => ClassifierSpec::RandomForest(ForestParams {
                seed,
                ..ForestParams::default()
            }),
            "mlp" => ClassifierSpec::Mlp(MlpParams {
                seed,
                ..MlpParams::default()
            }),
            other => return Err(ClassifierSpecError(format!("unknown classifier {other:?}"))),
        })
    }

    /// Short name as accepted by [`ClassifierSpec::from_name`].
    pub fn short_name(&self) -> String {
        match self {
            ClassifierSpec::Knn { k } => format!("{k}nn"),
            ClassifierSpec::GaussianNb => "nb".into(),
            ClassifierSpec::RandomForest(_) => "rf".into(),
            ClassifierSpec::Mlp(_) => "mlp".into(),
        }
    }

    /// Applies a `key=value` override.
    pub fn set_option(&mut self, key: &str, value: &str) -> Result<(), ClassifyError> {
        match self {
            ClassifierSpec::Knn { k } => match key {
                "k" => *k = parse_value(key, value)?,
                _ => return Err(invalid(format!("knn has no option {key:?}"))),
            },
            ClassifierSpec::GaussianNb => {
                return Err(invalid(format!("nb has no option {key:?}")));
            }
            ClassifierSpec::RandomForest(p) => match key {
                "trees" => p.trees = parse_value(key, value)?,
                "max_features" => {
                    p.max_features = match value {
                        "log2" => MaxFeatures::Log2Plus1,
                        "all" => MaxFeatures::All,
                        v => MaxFeatures::Fixed(parse_value(key, v)?),
                    }
                }
                "bootstrap" => p.bootstrap = parse_value(key, value)?,
                "seed" => p.seed = parse_value(key, value)?,
                _ => return Err(invalid(format!("rf has no option {key:?}"))),
            },
            ClassifierSpec::Mlp(p) => match key {
                "hidden" => {
                    p.hidden = match value {
                        "auto" => HiddenUnits::Auto,
                        v => HiddenUnits::Fixed(parse_value(key, v)?),
                    }
                }
                "learning_rate" | "lr" => p.learning_rate = parse_value(key, value)?,
                "momentum" => p.momentum = parse_value(key, value)?,
                "epochs" => p.epochs = parse_value(key, value)?,
                "seed" => p.seed = parse_value(key, value)?,
                "standardize" => p.standardize = parse_value(key, value)?,
                _ => return Err(invalid(format!("mlp has no option {key:?}"))),
            },
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        match self {
            ClassifierSpec::Knn { k } if *k == 0 || k % 2 == 0 => {
                Err(invalid(format!("k must be odd and positive, got {k}")))
            }
            ClassifierSpec::RandomForest(p) => {
                if p.trees == 0 {
                    return Err(invalid("trees must be at least 1"));
                }
                if p.max_features == MaxFeatures::Fixed(0) {
                    return Err(invalid("max_features must be at least 1"));
                }
                Ok(())
            }
            ClassifierSpec::Mlp(p) => {
                if p.epochs == 0 {
                    return Err(invalid("epochs must be at least 1"));
                }
                if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                    return Err(invalid("learning_rate must be positive"));
                }
                if !(p.momentum >= 0.0 && p.momentum < 1.0) {
                    return Err(invalid("momentum must lie in [0, 1)"));
                }
                if p.hidden == HiddenUnits::Fixed(0) {
                    return Err(invalid("hidden must be at least 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Knn { k } => write!(f, "knn(k={k})"),
            ClassifierSpec::GaussianNb => f.write_str("nb"),
            ClassifierSpec::RandomForest(p) => write!(
                f,
                "rf(trees={},max_features={},bootstrap={},seed={})",
                p.trees, p.max_features, p.bootstrap, p.seed
            ),
            ClassifierSpec::Mlp(p) => write!(
                f,
                "mlp(hidden={},learning_rate={},momentum={},epochs={},seed={},standardize={})",
                p.hidden, p.learning_rate, p.momentum, p.epochs, p.seed, p.standardize
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ClassifierSpecError(pub String);
