//! Ratio traces of mechanisms along worst-case instance families as the
//! drawn agents' distribution concentrates on points.

use aleatory_facility::adversary::{
    empirical_sar, family_lifted_plan, family_median_info, family_two_facility_unbounded,
    family_zero_info, k_quantile_responder_ratio, InstanceFamily, Mechanism, DEFAULT_SCHEDULE,
};
use aleatory_facility::bounds::{sar_lower, LowerRegime};
use aleatory_facility::single::QueryPlan;

fn show(mech: &Mechanism, family: &InstanceFamily) -> aleatory_facility::Result<()> {
    let t = empirical_sar(mech, family, &DEFAULT_SCHEDULE)?;
    let ratios: Vec<String> = t.ratios.iter().map(|r| format!("{r:.5}")).collect();
    let limit = t
        .limit_claim
        .map_or("unbounded".to_string(), |l| format!("{l:.5}"));
    println!(
        "{:<45} {mech:<22} [{}] -> {limit}",
        family.name,
        ratios.join(", ")
    );
    Ok(())
}

fn main() -> aleatory_facility::Result<()> {
    show(&Mechanism::ReportMedian, &family_zero_info(5, 3)?)?;
    show(
        &Mechanism::Plan { levels: vec![0.5] },
        &family_median_info(5, 3)?,
    )?;
    show(
        &Mechanism::Plan { levels: vec![0.5] },
        &family_median_info(11, 5)?,
    )?;
    let q = QueryPlan::new(vec![0.2, 0.9])?;
    show(
        &Mechanism::Plan {
            levels: q.levels().to_vec(),
        },
        &family_lifted_plan(13, 4, &q)?,
    )?;
    show(
        &Mechanism::Fixed2 { y: [0.5, 1.0] },
        &family_two_facility_unbounded(3, 2)?,
    )?;

    // Any response y to the even-grid construction pays at least the lower bound.
    let bound = sar_lower(LowerRegime::KQuantileEvenGrid, 15, 5, Some(2), false)?;
    println!("\neven-grid construction (n = 15, n_r = 5, k = 2), bound {bound:.4}:");
    for y in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!(
            "  response y = {y:.2}: ratio {:.4}",
            k_quantile_responder_ratio(15, 5, 2, y, 10_000)?
        );
    }
    Ok(())
}
