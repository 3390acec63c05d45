//! Optimal facility for a mix of reported and drawn agents, and how the
//! optimum moves as the drawn agents' distribution shifts.

use aleatory_facility::distributions::PiecewiseUniform;
use aleatory_facility::instance::{candidate_set, esc, solve_optimal, Instance, MixedCdf};

fn main() -> aleatory_facility::Result<()> {
    // Five agents: three report their position, two will be drawn from U[1, 2].
    let inst = Instance::new(5, vec![0.0, 0.0, 1.25])?;
    let mu = PiecewiseUniform::uniform(1.0, 2.0)?;

    let opt = solve_optimal(&inst, &mu);
    println!(
        "optimal set [{}, {}], canonical point {}",
        opt.lo, opt.hi, opt.canonical
    );
    println!(
        "expected cost at the optimum: {}",
        esc(&inst, &mu, opt.canonical)
    );
    println!(
        "expected cost at the report median 0: {}",
        esc(&inst, &mu, 0.0)
    );

    let mixed = MixedCdf::new(&inst, &mu);
    println!("mixed CDF at the optimum: {}", mixed.eval(opt.canonical));
    println!(
        "quantiles the optimum can sit on: {:?}",
        candidate_set(inst.n(), inst.n_u(), &mu)
    );

    // Slide the distribution to the right and watch the optimum follow.
    println!("\nshift  optimum  cost");
    for shift in [-2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
        let moved = PiecewiseUniform::from_triples(&[(1.0 + shift, 2.0 + shift, 1.0)])?;
        let s = solve_optimal(&inst, &moved);
        println!(
            "{shift:>5}  {:>7.4}  {:.4}",
            s.canonical,
            esc(&inst, &moved, s.canonical)
        );
    }
    Ok(())
}
