//! Truthful single-facility mechanisms with different amounts of
//! distribution information, compared with the optimum on one instance.

use aleatory_facility::distributions::PiecewiseUniform;
use aleatory_facility::instance::{esc, solve_optimal, Instance};
use aleatory_facility::single::{
    delta_lift, lift, median_mechanism, optimal_phantoms, optimal_query_plan, pqm, PhantomVector,
    QueryPlan,
};

fn main() -> aleatory_facility::Result<()> {
    let inst = Instance::new(9, vec![-1.0, 0.0, 0.5, 3.0])?;
    let mu = PiecewiseUniform::from_triples(&[(0.0, 1.0, 0.3), (2.0, 4.0, 0.7)])?;
    let n_r = inst.n_r();
    let n_u = inst.n_u();
    let opt = esc(&inst, &mu, solve_optimal(&inst, &mu).canonical);
    let report = |name: &str, y: f64| {
        let cost = esc(&inst, &mu, y);
        println!(
            "{name:<28} y = {y:>8.4}  cost = {cost:.4}  ratio = {:.4}",
            cost / opt
        );
    };

    report("optimum", solve_optimal(&inst, &mu).canonical);
    report("median of reports", median_mechanism(&inst)?);
    let half = PhantomVector::new(vec![0.5; n_u])?;
    report("median quantile only", pqm(&inst, &half, &mu)?);
    for k in [2, 3] {
        let grid = QueryPlan::even_grid(k)?;
        let w = lift(&grid, n_r, n_u)?;
        let gap = delta_lift(&grid, n_r, n_u)?;
        report(
            &format!("{k} equally spaced (gap {gap:.3})"),
            pqm(&inst, &w, &mu)?,
        );
        let best = optimal_query_plan(k, n_r, n_u)?;
        let gap = delta_lift(&best, n_r, n_u)?;
        report(
            &format!("{k} best levels (gap {gap:.3})"),
            pqm(&inst, &lift(&best, n_r, n_u)?, &mu)?,
        );
    }
    report("all quantiles", pqm(&inst, &optimal_phantoms(n_u), &mu)?);
    Ok(())
}
