use clap::ValueEnum;
use picod::collection::{binary_collection, build_log2_collection, expand_collection, Log2Options};
use picod::coloring::{exact_chi_cf, expand_to_kfold, greedy_cf_coloring};
use picod::encoder::{indicator_matrix_over, mds_matrix, stack, validate_encoder, ValidationReport};
use picod::localcf::min_delta_for_coloring;
use picod::{ColoringCollection, FieldMatrix, KFoldColoring, PicodInstance, Result};
use serde_json::{json, Value};

/// Exact chromatic search is used while `k * (active vertices)` stays below this.
const EXACT_COLORING_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Indicator,
    Mds,
    Log2Collection,
    Binary,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Indicator => "indicator",
            Strategy::Mds => "mds",
            Strategy::Log2Collection => "log2-collection",
            Strategy::Binary => "binary",
        }
    }
}

pub struct BuildParams {
    pub strategy: Strategy,
    pub k: usize,
    pub q: Option<u64>,
    pub seed: u64,
    pub c0: f64,
}

pub struct Built {
    pub matrix: FieldMatrix,
    pub report: ValidationReport,
    pub summary: Value,
}

/// Exact minimum-palette coloring on small instances, expanded greedy otherwise.
pub fn pick_coloring(inst: &PicodInstance, k: usize) -> Result<(KFoldColoring, &'static str)> {
    let active = inst.active_vertices().len().max(1);
    if k * active <= EXACT_COLORING_LIMIT {
        let (_, c) = exact_chi_cf(inst, k, k * active)?;
        Ok((c, "exact"))
    } else {
        Ok((expand_to_kfold(&greedy_cf_coloring(inst), k)?, "greedy"))
    }
}

fn stacked_indicators(col: &ColoringCollection, q: u64, m: usize, k: usize) -> Result<FieldMatrix> {
    if col.is_empty() {
        return FieldMatrix::zeros(q, k, 0, m * k);
    }
    let mats = col
        .colorings()
        .iter()
        .map(|c| indicator_matrix_over(c, q))
        .collect::<Result<Vec<_>>>()?;
    stack(&mats)
}

pub fn build(inst: &PicodInstance, p: &BuildParams) -> Result<Built> {
    let (matrix, mut summary) = match p.strategy {
        Strategy::Indicator => {
            let (c, how) = pick_coloring(inst, p.k)?;
            let g = indicator_matrix_over(&c, p.q.unwrap_or(2))?;
            (g, json!({ "coloring": how, "colors": c.palette() }))
        }
        Strategy::Mds => {
            let (c, how) = pick_coloring(inst, p.k)?;
            let choice = min_delta_for_coloring(&c, inst)?;
            let g = mds_matrix(&c, &choice.essential, inst, p.q)?;
            let info = json!({
                "coloring": how,
                "colors": c.palette(),
                "delta": choice.delta,
                "essential": choice.essential,
                "heuristic": choice.heuristic,
            });
            (g, info)
        }
        Strategy::Log2Collection => {
            let opts = Log2Options {
                c0: p.c0,
                ..Log2Options::default()
            };
            let out = build_log2_collection(inst, p.seed, opts)?;
            let col = expand_collection(&out.collection, p.k)?;
            let g = stacked_indicators(&col, p.q.unwrap_or(2), inst.m(), p.k)?;
            let info = json!({
                "gamma": out.gamma,
                "total_colors": col.total_colors(),
                "large_colors": out.large_colors,
                "bucket_colors": out.bucket_colors,
                "resamples": out.resamples,
                "fallback": out.fallback,
            });
            (g, info)
        }
        Strategy::Binary => {
            let col = expand_collection(&binary_collection(inst.m())?, p.k)?;
            let g = stacked_indicators(&col, p.q.unwrap_or(2), inst.m(), p.k)?;
            (g, json!({ "total_colors": col.total_colors() }))
        }
    };
    let report = validate_encoder(&matrix, inst)?;
    let extra = summary.as_object_mut().expect("summary is an object");
    extra.insert("strategy".into(), json!(p.strategy.name()));
    extra.insert("seed".into(), json!(p.seed));
    extra.insert("k".into(), json!(p.k));
    extra.insert("q".into(), json!(matrix.q()));
    extra.insert("rows".into(), json!(matrix.rows()));
    extra.insert("valid".into(), json!(report.valid));
    extra.insert("satisfied".into(), json!(report.satisfied_count()));
    extra.insert("receivers".into(), json!(inst.n()));
    Ok(Built {
        matrix,
        report,
        summary,
    })
}
