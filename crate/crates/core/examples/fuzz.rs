//! Random search for profitable misreports: truthful mechanisms show none,
//! the mean and the exact two-facility optimum are caught.

use aleatory_facility::adversary::{
    manipulation_probe, truthfulness_fuzz, truthfulness_fuzz_with_probes, Mechanism,
};

fn main() -> aleatory_facility::Result<()> {
    let mechanisms = [
        Mechanism::ReportMedian,
        Mechanism::Phantoms {
            levels: vec![0.1, 0.7, 0.7],
        },
        Mechanism::Pom,
        Mechanism::Aqm,
        Mechanism::Igm,
        Mechanism::Cem { k: 2 },
        Mechanism::Mean,
    ];
    for m in &mechanisms {
        let r = truthfulness_fuzz(m, 20_000, 42)?;
        println!(
            "{:<24} worst gain from lying: {:.3e}",
            m.to_string(),
            r.worst_regret
        );
        if let Some(w) = r.witness {
            println!(
                "    agent at {:.4} reports {:.4}: cost {:.4} -> {:.4}",
                w.truth, w.misreport, w.truthful_cost, w.deviating_cost
            );
        }
    }
    let r =
        truthfulness_fuzz_with_probes(&Mechanism::Optimal2, 2_000, 42, &[manipulation_probe()])?;
    println!(
        "{:<24} worst gain from lying: {:.4}",
        Mechanism::Optimal2.to_string(),
        r.worst_regret
    );
    Ok(())
}
