//! Turning a problem section into an instance and a start point.

use crate::config::{DatasetConfig, ExperimentConfig, ProblemConfig, StartPoint};
use crate::error::{HarnessError, Result};
use ssg_core::data::{parse_libsvm, split_dataset, DatasetSplit};
use ssg_core::problems::{
    dp_problem, erm_pretrain, l1_over_unit_disk, noisy_l1_over_unit_disk, roc_problem, synthetic_two_ball,
    LinearClassifierData,
};
use ssg_core::{DenseVector, ProblemInstance};
use std::collections::BTreeMap;
use std::io::BufReader;
use std::sync::Arc;

/// A built instance plus the facts worth printing about it.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: ProblemInstance,
    pub x0: DenseVector,
    pub x_erm: Option<DenseVector>,
    pub info: BTreeMap<String, f64>,
}

pub fn load_split(cfg: &ExperimentConfig, ds: &DatasetConfig) -> Result<DatasetSplit> {
    let path = cfg.data_dir(ds).join(&ds.file);
    let file = std::fs::File::open(&path).map_err(|e| HarnessError::io(&path, e))?;
    let data = parse_libsvm(BufReader::new(file))?;
    Ok(split_dataset(&data, ds.group, ds.split_seed, ds.retain_group_feature)?)
}

fn classifier_info(info: &mut BTreeMap<String, f64>, split: &DatasetSplit) {
    info.insert("n_constraint".into(), split.data.len() as f64);
    info.insert("n_protected".into(), split.rows_p.len() as f64);
    info.insert("n_unprotected".into(), split.rows_u.len() as f64);
    info.insert("dimension".into(), split.data.dim as f64);
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let mut info = BTreeMap::new();
    let (problem, x_erm) = match &cfg.problem {
        ProblemConfig::Dp { dataset, lambda, kappa, pretrain_iters, pretrain_eta } => {
            let split = load_split(cfg, dataset)?;
            classifier_info(&mut info, &split);
            let data = Arc::new(split.data);
            let x_erm = if cfg.run.x0 == StartPoint::Erm {
                Some(pretrain(&data, *pretrain_iters, *pretrain_eta, &mut info)?)
            } else {
                None
            };
            (dp_problem(data, *lambda, *kappa)?, x_erm)
        }
        ProblemConfig::Roc { dataset, kappa_frac, radius_mult, pretrain_iters, pretrain_eta } => {
            let split = load_split(cfg, dataset)?;
            classifier_info(&mut info, &split);
            let data = Arc::new(split.data);
            let l_star_and_x = erm_pretrain(data.clone(), *pretrain_iters, *pretrain_eta)?;
            info.insert("l_star".into(), l_star_and_x.0);
            let p = roc_problem(data, l_star_and_x.0, *kappa_frac, *radius_mult, &l_star_and_x.1)?;
            (p, Some(l_star_and_x.1))
        }
        ProblemConfig::TwoBall { c1, c2, radius, objective } => (
            synthetic_two_ball(c1.clone().into(), c2.clone().into(), *radius, objective.clone().into())?,
            None,
        ),
        ProblemConfig::L1Disk { a, outer, noise_sd } => {
            let p = match noise_sd {
                Some(sd) => noisy_l1_over_unit_disk(a.clone().into(), *outer, *sd)?,
                None => l1_over_unit_disk(a.clone().into(), *outer)?,
            };
            (p, None)
        }
    };
    let k = problem.constants();
    info.insert("m".into(), k.m);
    info.insert("rho".into(), k.rho);
    if let Some(g) = k.g_feas_value {
        info.insert("g_feas".into(), g);
    }

    let x0 = match (&cfg.run.x0_point, cfg.run.x0) {
        (Some(p), _) => {
            if p.len() != problem.dimension() {
                return Err(HarnessError::Invalid(format!(
                    "run.x0_point has {} entries, problem dimension is {}",
                    p.len(),
                    problem.dimension()
                )));
            }
            DenseVector::from(p.clone())
        }
        (None, StartPoint::Zero) => DenseVector::zeros(problem.dimension()),
        (None, StartPoint::Erm) => x_erm
            .clone()
            .ok_or_else(|| HarnessError::Invalid("x0 = \"erm\" needs a classification problem".into()))?,
        (None, StartPoint::Feasible) => k
            .x_feas
            .clone()
            .ok_or_else(|| HarnessError::Invalid("x0 = \"feasible\" but the instance has no Slater point".into()))?,
    };
    Ok(Prepared { problem, x0, x_erm, info })
}

fn pretrain(data: &Arc<LinearClassifierData>, iters: usize, eta: f64, info: &mut BTreeMap<String, f64>) -> Result<DenseVector> {
    let (l_star, x) = erm_pretrain(data.clone(), iters, eta)?;
    info.insert("l_star".into(), l_star);
    Ok(x)
}
