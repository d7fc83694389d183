use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use veilkit::classify::ClassifierSpec;
use veilkit::dataset::{load_features, save_features, synth_layer_pair, FeatureDataset, SynthSpec, Task};
use veilkit::eval::{cross_validate, CvSettings, EvalReport, FoldStrategy, PcaScope, Pipeline};
use veilkit::fusion::MergeMethod;
use veilkit::pca;
use veilkit::Error;

use crate::failure::Failure;
use crate::output::write_atomic;
use crate::{CommonArgs, ReduceArgs, RunArgs, SweepArgs, SynthArgs, ValidateArgs};

/// Which features feed the pipeline: one raw layer, or both merged.
#[derive(Debug, Clone, Copy)]
enum LayerChoice {
    Fc6,
    Fc7,
    Merged(MergeMethod),
}

impl LayerChoice {
    fn label(self) -> String {
        match self {
            LayerChoice::Fc6 => "fc6".into(),
            LayerChoice::Fc7 => "fc7".into(),
            LayerChoice::Merged(m) => m.to_string(),
        }
    }

    fn parse_row(s: &str) -> Result<Self, String> {
        match s {
            "fc6" => Ok(LayerChoice::Fc6),
            "fc7" => Ok(LayerChoice::Fc7),
            other => other
                .parse()
                .map(LayerChoice::Merged)
                .map_err(|_| format!("unknown layer row {other:?} (expected fc6, fc7, min, max or mean)")),
        }
    }
}

struct Loaded {
    path: PathBuf,
    data: FeatureDataset,
}

/// The input files named on the command line, loaded once.
struct Inputs {
    fc6: Option<Loaded>,
    fc7: Option<Loaded>,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let data = load_features(path, None)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        path: path.to_path_buf(),
        data,
    })
}

impl Inputs {
    fn load(common: &CommonArgs) -> Result<Self, Failure> {
        Ok(Inputs {
            fc6: common.fc6.as_deref().map(load).transpose()?,
            fc7: common.fc7.as_deref().map(load).transpose()?,
        })
    }
}

/// Options parsed once and shared by every cell of a run or sweep.
struct Shared {
    task: Task,
    pca_scope: PcaScope,
    settings: CvSettings,
    clf_opts: Vec<(String, String)>,
}

impl Shared {
    fn parse(common: &CommonArgs) -> Result<Self, Failure> {
        let task = common.task.parse::<Task>().map_err(Failure::config)?;
        let pca_scope: PcaScope = common.pca_scope.parse().map_err(Failure::config)?;
        let clf_opts = common
            .clf_opt
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Failure::config(format!("--clf-opt expects KEY=VALUE, got {kv:?}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Shared {
            task,
            pca_scope,
            settings: CvSettings {
                folds: common.folds,
                seed: common.seed,
                strategy: if common.unstratified {
                    FoldStrategy::Unstratified
                } else {
                    FoldStrategy::Stratified
                },
            },
            clf_opts,
        })
    }

    fn classifier(&self, name: &str) -> Result<ClassifierSpec, Failure> {
        let mut spec = ClassifierSpec::from_name(name, self.settings.seed)
            .map_err(|e| Failure::config(e.to_string()))?;
        let family = match spec {
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::GaussianNb => "nb",
            ClassifierSpec::RandomForest(_) => "rf",
            ClassifierSpec::Mlp(_) => "mlp",
        };
        for (k, v) in &self.clf_opts {
            // `rf.trees=50` only touches forests; a bare key applies to all.
            let key = match k.split_once('.') {
                Some((f, key)) if f == family => key,
                Some(_) => continue,
                None => k,
            };
            spec.set_option(key, v).map_err(|e| Failure::config(e.to_string()))?;
        }
        Ok(spec)
    }
}

fn parse_pca(s: &str) -> Result<Option<f64>, Failure> {
    if s == "none" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Failure::config(format!("PCA level must be a number in (0, 1] or none, got {s:?}")))
}

fn pca_label(pca: Option<f64>) -> String {
    pca.map_or_else(|| "none".into(), |r| r.to_string())
}

/// One complete experiment: pick the inputs, build the pipeline, run
/// cross-validation and echo the inputs used into the report.
fn experiment(
    shared: &Shared,
    inputs: &Inputs,
    layer: LayerChoice,
    pca: Option<f64>,
    clf: &str,
) -> Result<EvalReport, Failure> {
    let classifier = shared.classifier(clf)?;
    let missing = |flag: &str| Failure::config(format!("layer {} needs --{flag}", layer.label()));
    let (primary, secondary, merge) = match layer {
        LayerChoice::Fc6 => (inputs.fc6.as_ref().ok_or_else(|| missing("fc6"))?, None, None),
        LayerChoice::Fc7 => (inputs.fc7.as_ref().ok_or_else(|| missing("fc7"))?, None, None),
        LayerChoice::Merged(m) => (
            inputs.fc6.as_ref().ok_or_else(|| missing("fc6"))?,
            Some(inputs.fc7.as_ref().ok_or_else(|| missing("fc7"))?),
            Some(m),
        ),
    };
    let pipeline = Pipeline {
        merge,
        pca,
        pca_scope: shared.pca_scope,
        classifier,
    };
    let view = primary.data.label_view(shared.task);
    let mut report = cross_validate(
        &primary.data,
        secondary.map(|s| &s.data),
        &view,
        &pipeline,
        &shared.settings,
    )
    .map_err(|e: Error| Failure::from(e))?;

    let key = |l: LayerChoice| match l {
        LayerChoice::Fc7 => "fc7",
        _ => "fc6",
    };
    report.push_echo(key(layer), primary.path.display().to_string());
    if let Some(s) = secondary {
        report.push_echo("fc7", s.path.display().to_string());
    }
    info!(
        "{} pca={} clf={}: accuracy {} in {:.2?}",
        layer.label(),
        pca_label(pca),
        clf,
        report.accuracy,
        report.wall_time
    );
    Ok(report)
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let shared = Shared::parse(&args.common)?;
    let pca = parse_pca(&args.pca)?;
    let c = &args.common;
    let layer = match args.merge.as_str() {
        "none" => match (&c.fc6, &c.fc7) {
            (Some(_), None) => LayerChoice::Fc6,
            (None, Some(_)) => LayerChoice::Fc7,
            (Some(_), Some(_)) => {
                return Err(Failure::config("both --fc6 and --fc7 given but --merge is none"));
            }
            (None, None) => return Err(Failure::config("an input file is required (--fc6 or --fc7)")),
        },
        m => {
            let method = m.parse::<MergeMethod>().map_err(Failure::config)?;
            if c.fc6.is_none() || c.fc7.is_none() {
                return Err(Failure::config(format!("--merge {method} requires both --fc6 and --fc7")));
            }
            LayerChoice::Merged(method)
        }
    };
    shared.classifier(&args.clf)?;

    let inputs = Inputs::load(c)?;
    let report = experiment(&shared, &inputs, layer, pca, &args.clf)?;
    let text = report.to_text();
    match &args.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cell_file(layer: LayerChoice, pca: Option<f64>, clf: &str) -> String {
    format!("{}_{}_{}.txt", layer.label(), pca_label(pca), clf)
}

pub fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let shared = Shared::parse(&args.common)?;
    let layers: Vec<LayerChoice> = args
        .layers
        .iter()
        .map(|s| LayerChoice::parse_row(s).map_err(Failure::config))
        .collect::<Result<_, _>>()?;
    let levels: Vec<Option<f64>> = args.pca_levels.iter().map(|s| parse_pca(s)).collect::<Result<_, _>>()?;
    if args.clfs.is_empty() {
        return Err(Failure::config("no classifiers given"));
    }
    let inputs = Inputs::load(&args.common)?;

    let rows: Vec<(LayerChoice, Option<f64>)> = layers
        .iter()
        .flat_map(|&l| levels.iter().map(move |&p| (l, p)))
        .collect();
    let cells: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|r| (0..args.clfs.len()).map(move |c| (r, c)))
        .collect();
    let results: Vec<Result<EvalReport, Failure>> = cells
        .par_iter()
        .map(|&(r, c)| experiment(&shared, &inputs, rows[r].0, rows[r].1, &args.clfs[c]))
        .collect();

    let reports_dir = args.out.join("reports");
    let mut accuracy = String::from("layer,pca");
    for clf in &args.clfs {
        write!(accuracy, ",{clf}").unwrap();
    }
    accuracy.push('\n');
    let mut metrics =
        String::from("layer,pca,classifier,accuracy,weighted_f_measure,roc_area,prc_area\n");
    let mut failed = 0;
    let undefined = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| v.to_string());

    for (r, &(layer, pca)) in rows.iter().enumerate() {
        write!(accuracy, "{},{}", layer.label(), pca_label(pca)).unwrap();
        for (c, clf) in args.clfs.iter().enumerate() {
            let result = &results[r * args.clfs.len() + c];
            write!(metrics, "{},{},{clf},", layer.label(), pca_label(pca)).unwrap();
            match result {
                Ok(report) => {
                    write!(accuracy, ",{}", report.accuracy).unwrap();
                    writeln!(
                        metrics,
                        "{},{},{},{}",
                        report.accuracy,
                        report.weighted_f_measure,
                        undefined(report.roc_area),
                        undefined(report.prc_area)
                    )
                    .unwrap();
                    write_atomic(
                        &reports_dir.join(cell_file(layer, pca, clf)),
                        report.to_text().as_bytes(),
                    )?;
                }
                Err(f) => {
                    failed += 1;
                    warn!("{} pca={} clf={clf}: {}", layer.label(), pca_label(pca), f.message);
                    accuracy.push_str(",ERR");
                    metrics.push_str("ERR,ERR,ERR,ERR\n");
                }
            }
        }
        accuracy.push('\n');
    }
    write_atomic(&args.out.join("accuracy.csv"), accuracy.as_bytes())?;
    write_atomic(&args.out.join("metrics.csv"), metrics.as_bytes())?;

    if failed > 0 {
        return Err(Failure::runtime(format!("{failed} of {} sweep cells failed", cells.len())));
    }
    Ok(())
}

pub fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let ds = load_features(&args.path, args.dim)
        .map_err(|e| Failure::data(format!("{}: {e}", args.path.display())))?;
    println!("n={}, d={}, layer={}", ds.len(), ds.dim(), ds.layer());
    for task in Task::ALL {
        let view = ds.label_view(task);
        let histogram: Vec<String> = view
            .class_names
            .iter()
            .zip(view.class_sizes())
            .map(|(name, n)| format!("{name}={n}"))
            .collect();
        println!("{task}: {} classes: {}", view.class_count(), histogram.join(" "));
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec {
        classes: args.classes,
        per_class: args.per_class,
        dim: args.dim,
        separation: args.separation,
        seed: args.seed,
    };
    let (fc6, fc7, _) = synth_layer_pair(&spec).map_err(|e| Failure::config(e.to_string()))?;
    save_features(&args.fc6, &fc6)?;
    if let Some(path) = &args.fc7 {
        save_features(path, &fc7)?;
    }
    Ok(())
}

pub fn reduce(args: ReduceArgs) -> Result<(), Failure> {
    let ds = load(&args.input)?.data;
    let model = pca::fit(ds.features().view(), args.pca).map_err(|e| Failure::from(Error::from(e)))?;
    let reduced = model
        .transform_dataset(&ds)
        .map_err(|e| Failure::from(Error::from(e)))?;
    let mut summary = Vec::new();
    model.write_summary(&mut summary)?;
    save_features(&args.out, &reduced)?;
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".pca.txt");
    write_atomic(Path::new(&sidecar), &summary)?;
    Ok(())
}
