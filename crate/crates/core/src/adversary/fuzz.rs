//! Randomised search for profitable misreports.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::random::{random_instance_with, random_two_instance};
use super::{Case, Mechanism};
use crate::distributions::PiecewiseUniform;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::two::TwoInstance;

const MAX_SEGMENTS: usize = 8;

/// One agent of one instance together with a misreport to try.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub case: Case,
    /// Index of the agent in the sorted reports.
    pub agent: usize,
    pub misreport: f64,
}

/// The misreport that gained the most.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub case: Case,
    pub agent: usize,
    pub truth: f64,
    pub misreport: f64,
    pub truthful_cost: f64,
    pub deviating_cost: f64,
}

/// Largest gain `truthful cost - deviating cost` found over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub mechanism: String,
    pub trials: usize,
    pub seed: u64,
    pub worst_regret: f64,
    pub witness: Option<Witness>,
}

/// Two facilities of capacity 5, reports `(0, 1, 1, 2, 9, 9, 9, 9)` and two
/// drawn agents uniform on `[0, 1]`. The agent at 2 gains 5.75 by reporting
/// 0.75 to the exact optimum.
pub fn manipulation_probe() -> Probe {
    let instance =
        TwoInstance::new(5, vec![0.0, 1.0, 1.0, 2.0, 9.0, 9.0, 9.0, 9.0]).expect("valid instance");
    let mu = PiecewiseUniform::uniform(0.0, 1.0).expect("valid distribution");
    Probe {
        case: Case::Two { instance, mu },
        agent: 3,
        misreport: 0.75,
    }
}

fn reports_of(case: &Case) -> &[f64] {
    match case {
        Case::Single { instance, .. } => instance.reports(),
        Case::Two { instance, .. } => instance.reports(),
    }
}

/// Personal cost of the agent at index `agent` (in `reports`, before sorting)
/// whose true position is `truth`.
fn personal_cost(
    mech: &Mechanism,
    case: &Case,
    reports: Vec<f64>,
    agent: usize,
    truth: f64,
) -> Result<f64> {
    match case {
        Case::Single { instance, mu } => {
            let inst = Instance::new(instance.n(), reports)?;
            Ok((truth - mech.place(&inst, mu)?).abs())
        }
        Case::Two { instance, mu } => {
            let me = reports[agent];
            // Sorting is stable, so equal reports keep their relative order.
            let pos = reports
                .iter()
                .enumerate()
                .filter(|&(j, &r)| r < me || (r == me && j < agent))
                .count();
            let inst = TwoInstance::new(instance.c(), reports)?;
            let out = mech.place_two(&inst, mu)?;
            Ok((truth - out.facility_of(pos)).abs())
        }
    }
}

fn with_report(reports: &[f64], agent: usize, value: f64) -> Vec<f64> {
    let mut r = reports.to_vec();
    r[agent] = value;
    r
}

fn facility_positions(mech: &Mechanism, case: &Case) -> Result<Vec<f64>> {
    Ok(match case {
        Case::Single { instance, mu } => vec![mech.place(instance, mu)?],
        Case::Two { instance, mu } => {
            let out = mech.place_two(instance, mu)?;
            vec![out.y1(), out.y2()]
        }
    })
}

fn sample_case<R: Rng>(mech: &Mechanism, rng: &mut R) -> Case {
    if mech.is_two_facility() {
        let c = rng.random_range(1..=5);
        let (lo, hi) = match mech {
            Mechanism::Pom => (1, c),
            Mechanism::Aqm | Mechanism::Igm => (c + 1, 2 * c),
            _ => (1, 2 * c),
        };
        let n_r = rng.random_range(lo..=hi);
        let (instance, mu) = random_two_instance(rng, c, n_r, MAX_SEGMENTS);
        return Case::Two { instance, mu };
    }
    let (n, n_r) = match mech {
        Mechanism::Phantoms { levels } => {
            let n_u = levels.len();
            // n_r >= 1 with n_r + n_u odd.
            let n_r = if n_u % 2 == 0 {
                2 * rng.random_range(0..=4) + 1
            } else {
                2 * rng.random_range(1..=4)
            };
            (n_r + n_u, n_r)
        }
        _ => {
            let n = 2 * rng.random_range(0..=7) + 1;
            (n, rng.random_range(1..=n))
        }
    };
    let (instance, mu) = random_instance_with(rng, n, n_r, MAX_SEGMENTS);
    Case::Single { instance, mu }
}

struct Tracker {
    worst: f64,
    witness: Option<Witness>,
}

impl Tracker {
    fn try_misreport(
        &mut self,
        mech: &Mechanism,
        case: &Case,
        agent: usize,
        misreport: f64,
        truthful: f64,
    ) -> Result<()> {
        let reports = reports_of(case);
        let truth = reports[agent];
        let deviating = personal_cost(
            mech,
            case,
            with_report(reports, agent, misreport),
            agent,
            truth,
        )?;
        let regret = truthful - deviating;
        if regret > self.worst {
            self.worst = regret;
            self.witness = Some(Witness {
                case: case.clone(),
                agent,
                truth,
                misreport,
                truthful_cost: truthful,
                deviating_cost: deviating,
            });
        }
        Ok(())
    }
}

/// Samples `trials` random instances within the mechanism's regime, picks an
/// agent and tries several misreports: a uniform point, another agent's
/// report, a small perturbation and the truthful facility positions.
/// Deterministic given `seed`.
pub fn truthfulness_fuzz(mech: &Mechanism, trials: usize, seed: u64) -> Result<FuzzReport> {
    truthfulness_fuzz_with_probes(mech, trials, seed, &[])
}

/// As [`truthfulness_fuzz`], additionally evaluating the given probes.
pub fn truthfulness_fuzz_with_probes(
    mech: &Mechanism,
    trials: usize,
    seed: u64,
    probes: &[Probe],
) -> Result<FuzzReport> {
    if trials == 0 && probes.is_empty() {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker {
        worst: f64::NEG_INFINITY,
        witness: None,
    };
    for p in probes {
        let reports = reports_of(&p.case);
        if p.agent >= reports.len() {
            return Err(Error::Domain(format!(
                "probe agent {} out of range",
                p.agent
            )));
        }
        let truthful = personal_cost(mech, &p.case, reports.to_vec(), p.agent, reports[p.agent])?;
        tracker.try_misreport(mech, &p.case, p.agent, p.misreport, truthful)?;
    }
    for _ in 0..trials {
        let case = sample_case(mech, &mut rng);
        let reports = reports_of(&case);
        let agent = rng.random_range(0..reports.len());
        let truth = reports[agent];
        let truthful = personal_cost(mech, &case, reports.to_vec(), agent, truth)?;
        let mut candidates = vec![
            rng.random_range(-12.0..=12.0),
            truth + rng.random_range(-0.5..=0.5),
            *reports.choose(&mut rng).expect("at least one report"),
        ];
        candidates.extend(facility_positions(mech, &case)?);
        for m in candidates {
            tracker.try_misreport(mech, &case, agent, m, truthful)?;
        }
    }
    Ok(FuzzReport {
        mechanism: mech.to_string(),
        trials,
        seed,
        worst_regret: tracker.worst,
        witness: tracker.witness,
    })
}
