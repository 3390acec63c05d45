//! Two capacitated facilities: the exact optimum, the manipulation it
//! admits, and the truthful mechanisms for each report regime.

use aleatory_facility::distributions::PiecewiseUniform;
use aleatory_facility::single::QueryPlan;
use aleatory_facility::two::{
    aqm, cem, esc2, igm, pom, solve_optimal2, TwoFacilityOutcome, TwoInstance,
};

fn show(
    name: &str,
    inst: &TwoInstance,
    mu: &PiecewiseUniform,
    out: &TwoFacilityOutcome,
) -> aleatory_facility::Result<()> {
    let cost = esc2(inst, mu, out)?;
    let opt = esc2(inst, mu, &solve_optimal2(inst, mu))?;
    println!(
        "  {name:<8} y = ({:.4}, {:.4})  loads {:?}  cost {cost:.4}  ratio {:.4}",
        out.y1(),
        out.y2(),
        out.loads(),
        cost / opt
    );
    Ok(())
}

fn main() -> aleatory_facility::Result<()> {
    let unit = PiecewiseUniform::uniform(0.0, 1.0)?;
    let inst = TwoInstance::new(5, vec![0.0, 1.0, 1.0, 2.0, 9.0, 9.0, 9.0, 9.0])?;
    let out = solve_optimal2(&inst, &unit);
    println!(
        "optimum {:?}; the agent at 2 travels {}",
        out.y,
        (2.0 - out.facility_of(3)).abs()
    );
    let lie = TwoInstance::new(5, vec![0.0, 1.0, 1.0, 0.75, 9.0, 9.0, 9.0, 9.0])?;
    let dev = solve_optimal2(&lie, &unit);
    let pos = lie
        .reports()
        .iter()
        .position(|&x| x == 0.75)
        .expect("reported");
    println!(
        "after reporting 0.75 it travels {}",
        (2.0 - dev.facility_of(pos)).abs()
    );

    let mu = PiecewiseUniform::from_triples(&[(-1.0, 0.0, 0.5), (4.0, 6.0, 0.5)])?;
    let grid = QueryPlan::even_grid(2)?;
    println!("\nfew reports (n_r <= c):");
    let few = TwoInstance::new(4, vec![-0.5, 2.0, 5.0])?;
    show("optimum", &few, &mu, &solve_optimal2(&few, &mu))?;
    show("pom", &few, &mu, &pom(&few, &mu)?)?;
    show("cem k=2", &few, &mu, &cem(&few, &mu, &grid)?)?;
    println!("  igm      {}", igm(&few, &mu).unwrap_err());

    println!("\nmany reports (n_r > c):");
    let many = TwoInstance::new(3, vec![-0.5, -0.2, 1.0, 4.5, 5.0])?;
    show("optimum", &many, &mu, &solve_optimal2(&many, &mu))?;
    show("aqm", &many, &mu, &aqm(&many, &mu)?)?;
    show("igm", &many, &mu, &igm(&many, &mu)?)?;
    show("cem k=2", &many, &mu, &cem(&many, &mu, &grid)?)?;
    Ok(())
}
