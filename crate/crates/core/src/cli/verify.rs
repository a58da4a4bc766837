//! The reproduction suite: ten acceptance criteria, each producing its own
//! report section, combined into one consolidated report.

use std::time::Instant;

use super::commands::{
    build_curve, sec_brick, sec_brody, sec_characteristic, sec_cube, sec_degree, sec_formula,
    sec_helmholtz, sec_lower_bound, sec_mean_energy, sec_random_bounds, sec_residual,
    seconds_since,
};
use super::config::RunConfig;
use super::report::{Check, ReportDocument};
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    /// Wall-clock limit in seconds, when the criterion has one.
    pub time_limit: Option<f64>,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "mean energy of the extremal curve by closed form and by quadrature",
        time_limit: Some(60.0),
    },
    Criterion {
        id: 2,
        title: "lower mean-dimension bound 4e",
        time_limit: None,
    },
    Criterion {
        id: 3,
        title: "Brody normalization: sup |df| = 1 and the rational density supremum",
        time_limit: Some(30.0),
    },
    Criterion {
        id: 4,
        title: "energy per period equals the degree 2",
        time_limit: None,
    },
    Criterion {
        id: 5,
        title: "characteristic bound T <= pi r^2/2 and growth ratio at r_max",
        time_limit: None,
    },
    Criterion {
        id: 6,
        title: "exact cover multiplicities and brick covers of multiplicity d+1",
        time_limit: Some(120.0),
    },
    Criterion {
        id: 7,
        title: "residual example: fixed-point dimensions and window ratios",
        time_limit: None,
    },
    Criterion {
        id: 8,
        title: "dimension-count formula and mean-dimension bounds",
        time_limit: None,
    },
    Criterion {
        id: 9,
        title: "Helmholtz barrier: w values, stencil order and maximum principle",
        time_limit: None,
    },
    Criterion {
        id: 10,
        title: "determinism: repeated runs give identical reports",
        time_limit: None,
    },
];

pub fn criterion(id: u8) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// Listing printed by `verify --list`.
pub fn list_text() -> String {
    CRITERIA
        .iter()
        .map(|c| format!("{:>2}  {}\n", c.id, c.title))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    /// Section report, or the error that stopped the computation.
    pub result: Result<ReportDocument, CliError>,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.result, Ok(doc) if doc.passed)
    }

    pub fn failure(&self) -> Option<String> {
        match &self.result {
            Ok(doc) => doc.first_failure(),
            Err(e) => Some(format!("error: {e}")),
        }
    }

    /// `PASS [ 1] title (0.12 s)` or `FAIL [ 1] title (0.12 s): reason`.
    pub fn line(&self) -> String {
        let head = format!(
            "{} [{:>2}] {} ({:.2} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.criterion.id,
            self.criterion.title,
            self.seconds
        );
        match self.failure() {
            Some(reason) => format!("{head}: {reason}"),
            None => head,
        }
    }
}

fn run_section(id: u8, cfg: &RunConfig, doc: &mut ReportDocument) -> Result<(), CliError> {
    match id {
        1 => {
            let curve = build_curve(cfg)?;
            sec_mean_energy(doc, cfg, &curve)?;
        }
        2 => {
            let curve = build_curve(cfg)?;
            sec_lower_bound(doc, 2.0 / curve.lattice().area());
        }
        3 => {
            let curve = build_curve(cfg)?;
            sec_brody(doc, cfg, &curve)?;
        }
        4 => {
            let curve = build_curve(cfg)?;
            sec_degree(doc, cfg, &curve)?;
        }
        5 => {
            let curve = build_curve(cfg)?;
            sec_characteristic(doc, cfg, &curve, 2.0 / curve.lattice().area())?;
        }
        6 => {
            let start = Instant::now();
            sec_cube(doc, 2, 3, 2, false)?;
            let exhaustive = seconds_since(start);
            sec_cube(doc, 1, 4, 2, false)?;
            let limit = criterion(6)
                .and_then(|c| c.time_limit)
                .unwrap_or(f64::INFINITY);
            doc.check(Check::new(
                "exhaustive_d2_runtime",
                exhaustive < limit,
                format!("d=2 exhaustive search within {limit} s"),
            ));
            for (d, n) in [(1, 6), (2, 6), (3, 4)] {
                sec_brick(doc, d, n, 2)?;
            }
        }
        7 => sec_residual(doc, cfg)?,
        8 => {
            let curve = build_curve(cfg)?;
            let mut formula_cfg = cfg.clone();
            formula_cfg.widim.formula.proj_dim = 1;
            formula_cfg.widim.formula.deg = 2;
            formula_cfg.widim.formula.n = 1;
            sec_formula(doc, &formula_cfg, &curve)?;
            sec_random_bounds(doc, cfg)?;
        }
        9 => sec_helmholtz(doc, cfg)?,
        _ => return Err(CliError::Config(format!("criterion {id} has no section"))),
    }
    Ok(())
}

/// Runs one of criteria 1 to 9.
pub fn run_criterion(id: u8, cfg: &RunConfig) -> CriterionOutcome {
    let criterion = *criterion(id).unwrap_or(&CRITERIA[0]);
    let start = Instant::now();
    let mut doc = ReportDocument::new(&format!("criterion {id}"), cfg.seed);
    let result = run_section(id, cfg, &mut doc).map(|()| doc);
    let seconds = seconds_since(start);
    let result = result.map(|mut doc| {
        if let Some(limit) = criterion.time_limit {
            if id != 6 {
                doc.check(Check::new(
                    "runtime",
                    seconds < limit,
                    format!("within {limit} s"),
                ));
            }
        }
        doc
    });
    CriterionOutcome {
        criterion,
        result,
        seconds,
    }
}

/// Criteria 1 to 9, in order.
pub fn run_suite(cfg: &RunConfig) -> Vec<CriterionOutcome> {
    (1..=9).map(|id| run_criterion(id, cfg)).collect()
}

/// Combines section outcomes into one report. Failed computations become
/// failing checks.
pub fn consolidate(cfg: &RunConfig, outcomes: &[CriterionOutcome]) -> ReportDocument {
    let mut doc = ReportDocument::new("verify", cfg.seed);
    for o in outcomes {
        let id = o.criterion.id;
        match &o.result {
            Ok(section) => {
                for s in &section.scalars {
                    let mut s = s.clone();
                    s.name = format!("c{id}.{}", s.name);
                    doc.scalar(s);
                }
                for c in &section.checks {
                    doc.check(Check::new(
                        &format!("c{id}.{}", c.name),
                        c.passed,
                        c.detail.clone(),
                    ));
                }
                for t in &section.tables {
                    let mut t = t.clone();
                    t.name = format!("c{id}_{}", t.name);
                    doc.table(t);
                }
            }
            Err(e) => doc.check(Check::new(
                &format!("c{id}.computation"),
                false,
                e.to_string(),
            )),
        }
        doc.runtime(&format!("criterion_{id}"), o.seconds);
    }
    doc
}

/// Criterion 10: two suite runs must consolidate to the same report.
pub fn determinism_outcome(
    cfg: &RunConfig,
    first: &ReportDocument,
    second: &ReportDocument,
    seconds: f64,
) -> CriterionOutcome {
    let mut doc = ReportDocument::new("criterion 10", cfg.seed);
    let same = first.comparable_json() == second.comparable_json();
    doc.check(Check::new(
        "identical_reports",
        same,
        if same {
            "second run matches the first, timestamps excluded"
        } else {
            "second run differs from the first"
        },
    ));
    CriterionOutcome {
        criterion: CRITERIA[9],
        result: Ok(doc),
        seconds,
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: ReportDocument,
    pub outcomes: Vec<CriterionOutcome>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CriterionOutcome::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// `criterion N (title): reason` for the first failing criterion.
    pub fn first_failure(&self) -> Option<String> {
        self.outcomes.iter().find(|o| !o.passed()).map(|o| {
            format!(
                "criterion {} ({}): {}",
                o.criterion.id,
                o.criterion.title,
                o.failure().unwrap_or_default()
            )
        })
    }
}

/// Runs criteria 1 to 9 twice and compares the two consolidated reports.
pub fn cmd_verify(cfg: &RunConfig) -> VerifyOutcome {
    let mut outcomes = run_suite(cfg);
    let first = consolidate(cfg, &outcomes);
    let start = Instant::now();
    let second = consolidate(cfg, &run_suite(cfg));
    let det = determinism_outcome(cfg, &first, &second, seconds_since(start));
    outcomes.push(det);
    let mut report = consolidate(cfg, &outcomes);
    report.stamp();
    VerifyOutcome { report, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_has_ten_criteria() {
        let text = list_text();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with(" 1  mean energy"));
    }

    #[test]
    fn cheap_criteria_pass() {
        let cfg = RunConfig::default();
        for id in [1, 2, 4, 7, 8] {
            let o = run_criterion(id, &cfg);
            assert!(o.passed(), "{}", o.line());
        }
    }

    #[test]
    fn absurd_tolerance_fails_first_criterion() {
        let cfg =
            RunConfig::from_json_str(r#"{"quadrature": {"abs_tol": 1e-30, "rel_tol": 1e-30}}"#)
                .unwrap();
        let o = run_criterion(1, &cfg);
        assert!(!o.passed());
        assert!(o.line().starts_with("FAIL [ 1]"));
    }

    #[test]
    fn consolidate_prefixes_names() {
        let cfg = RunConfig::default();
        let doc = consolidate(&cfg, &[run_criterion(2, &cfg)]);
        assert_eq!(doc.scalars[0].name, "c2.lower_bound_4e");
        assert!(doc.passed);
    }
}
