use super::config::{tau_ladder, ExperimentConfig, ExperimentId};
use super::experiments::execute;
use super::report::{write_outputs, ExperimentReport, ReportRow};
use crate::error::{Result, RrwError};
use crate::kernels::Regime;
use crate::manifolds::{sphere, ManifoldSpec};
use serde::Serialize;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Reduced replica counts; same tolerances.
    Fast,
    Full,
}

impl FromStr for Tier {
    type Err = RrwError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Tier::Fast),
            "full" => Ok(Tier::Full),
            other => Err(RrwError::Config(format!("unknown tier `{other}`"))),
        }
    }
}

/// Acceptance criteria in suite order, with a one-line statement of each.
pub const CRITERIA: [(&str, &str); 16] = [
    ("kernel-exactness", "B_d (d=1,2,3) and S_d (d=2,3) match angular quadrature to 1e-8 on 200 radii in [0,50]"),
    ("weyl-law", "torus2 at 2pi*80: |K(2pi)^2/(pi lambda^2) - 1| <= 0.05, and |ratio - 1| decreases in lambda"),
    ("local-weyl", "torus2 local kernel sup error at 2pi*80 is at most half of that at 2pi*20"),
    ("sz-clt", "torus2, one draw at 2pi*120: |cf - e^{-1/2}| <= 0.02 and Kolmogorov distance <= 0.04"),
    ("clt-rate", "Delta^(1) log-log slope over 2pi*{15,30,60,120} in [-1.3,-0.7] with r2 >= 0.9"),
    ("decorrelation", "decorrelation log-log slope over the same ladder in [-1.25,-0.75] with r2 >= 0.9"),
    ("nodal-constant-d1", "torus1 at 2pi*300: zeros/lambda within 1% of 1/(pi sqrt3) over 20 draws, 3% for one draw"),
    ("nodal-constant-d2-large-band", "torus2 at 2pi*40: length/lambda within 3% of 1/4 over 20 draws, 8% for one draw"),
    ("nodal-constant-d2-monochromatic", "sphere l=60: mean patch nodal length within 5% of 1/(2 sqrt2) over 20 draws"),
    ("nodal-measure", "torus2 at 2pi*40: mean nodal integral of 1+cos(2pi x1) within 5% of 1/4"),
    ("local-global", "local-ball representation ratio in [0.97,1.03] for a closed-form field and one draw at 2pi*20"),
    ("kac-rice", "limit field d=2: gradient variance within 2% of 1/4, E|grad| and zero density within 1%"),
    ("crofton", "vertex-line bound holds on 100/100 nodal patches"),
    ("negative-moments", "E_X|g|^{-0.012} has no increasing trend (Kendall, 5%) and max <= 1.2"),
    ("tightness-moments", "E_X|d1 g|^2 within 5% of 1/4 at 2pi*60, max/min <= 1.3 over the ladder"),
    ("uniform-integrability", "E[Z^2] shows no increasing trend over the ladder (Kendall, 5%)"),
];

/// The experiment configurations of the suite.
pub fn acceptance_configs(tier: Tier, seed: u64) -> Vec<ExperimentConfig> {
    let fast = tier == Tier::Fast;
    let base = |id: ExperimentId| {
        let mut c = ExperimentConfig::default_for(id);
        c.seed = seed;
        c
    };
    let mut szclt = base(ExperimentId::Szclt);
    if fast {
        szclt.replicas = 50;
    }
    let mut torus1 = base(ExperimentId::Nodal);
    torus1.manifold = ManifoldSpec::Torus { dim: 1 };
    torus1.lambdas = tau_ladder(&[300.0]);
    let mut torus2 = base(ExperimentId::Nodal);
    let mut measure = base(ExperimentId::NodalMeasure);
    let mut sphere2 = base(ExperimentId::Nodal);
    sphere2.manifold = ManifoldSpec::Sphere2;
    sphere2.regime = Regime::Monochromatic;
    sphere2.lambdas = vec![sphere::degree_frequency(60)];
    let mut kacrice = base(ExperimentId::Kacrice);
    let mut tightness = base(ExperimentId::Tightness);
    let mut crofton = base(ExperimentId::Crofton);
    if fast {
        for c in [&mut torus2, &mut measure] {
            c.replicas = 5;
            c.grid = 1024;
        }
        sphere2.replicas = 5;
        sphere2.patches = 200;
        kacrice.replicas = 20_000;
        tightness.patches = 100;
        crofton.x_draws = 32;
    }
    vec![
        base(ExperimentId::Kernels),
        base(ExperimentId::Weyl),
        szclt,
        base(ExperimentId::Decor),
        torus1,
        torus2,
        sphere2,
        measure,
        base(ExperimentId::LocalGlobal),
        kacrice,
        crofton,
        base(ExperimentId::Negmom),
        tightness,
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: String,
    pub statement: String,
    /// True iff the criterion has gated rows and all of them pass.
    pub pass: bool,
    pub rows: Vec<ReportRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceSummary {
    pub tier: Tier,
    pub seed: u64,
    pub outcomes: Vec<CriterionOutcome>,
    pub reports: Vec<ExperimentReport>,
    pub wall_clock_s: f64,
}

impl AcceptanceSummary {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// One `PASS`/`FAIL` line per criterion.
    pub fn lines(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .map(|o| {
                let detail = o
                    .rows
                    .iter()
                    .map(|r| format!("{}={:.6}", r.quantity, r.estimate))
                    .collect::<Vec<_>>()
                    .join(" ");
                format!("{} {:<32} {}", if o.pass { "PASS" } else { "FAIL" }, o.id, detail)
            })
            .collect()
    }
}

/// Groups gated rows of the reports by criterion, in [`CRITERIA`] order.
pub fn collect_outcomes(reports: &[ExperimentReport]) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|(id, statement)| {
            let rows: Vec<ReportRow> = reports
                .iter()
                .flat_map(|r| r.rows.iter())
                .filter(|r| r.criterion.as_deref() == Some(id))
                .cloned()
                .collect();
            let pass = !rows.is_empty() && rows.iter().all(|r| r.pass == Some(true));
            CriterionOutcome { id: id.to_string(), statement: statement.to_string(), pass, rows }
        })
        .collect()
}

/// Runs every acceptance experiment with master seed 0.
pub fn acceptance_suite(tier: Tier) -> Result<AcceptanceSummary> {
    acceptance_suite_with(tier, 0, None)
}

/// Runs the suite; with `out`, each experiment writes its files to
/// `out/<k>_<experiment>_<manifold>` and the summary goes to
/// `out/acceptance_summary.json`.
pub fn acceptance_suite_with(tier: Tier, seed: u64, out: Option<&Path>) -> Result<AcceptanceSummary> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for (k, c) in acceptance_configs(tier, seed).into_iter().enumerate() {
        let res = execute(&c)?;
        if let Some(dir) = out {
            let sub = dir.join(format!("{k:02}_{}_{}", c.experiment, c.manifold));
            write_outputs(&sub, c.seed, &c.canonical_text(), &res.report, &res.tables, &res.extra_json)?;
        }
        reports.push(res.report);
    }
    let summary = AcceptanceSummary {
        tier,
        seed,
        outcomes: collect_outcomes(&reports),
        reports,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("acceptance_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(summary)
}
