//! Worst-case ratio bounds across information regimes for a few report shares.

use aleatory_facility::bounds::{gap_ratio, k_grid_lower_closed_form};
use aleatory_facility::experiment::{fmt_float, sar_table_rows, SarSweep};

fn main() -> aleatory_facility::Result<()> {
    let sweep = SarSweep {
        n: vec![15, 45, 75],
        n_r: vec![],
        lambda: vec![0.2, 1.0 / 3.0, 0.6, 0.8],
        k: vec![0, 1, 2, 3, 6],
    };
    println!(
        "{:>3} {:>3} {:>7} {:>2} {:>7} {:>9} {:>9}",
        "n", "n_r", "lambda", "k", "regime", "upper", "lower"
    );
    for r in sar_table_rows(&sweep)? {
        let lower = r.lower.map(fmt_float).unwrap_or_else(|| "-".into());
        println!(
            "{:>3} {:>3} {:>7.4} {:>2} {:>7} {:>9.5} {:>9.9}",
            r.n, r.n_r, r.lambda, r.k, r.regime, r.upper, lower
        );
    }

    println!("\nratio guaranteed by a plan whose lifted levels miss a target by delta:");
    for delta in [0.0, 0.05, 0.1, 0.2] {
        println!(
            "  lambda 0.5, delta {delta:.2}: {:.4}",
            gap_ratio(0.5, delta)
        );
    }
    println!(
        "\nclosed-form even-grid lower bound for n = 15, n_r = 5, k = 2: {:.4}",
        k_grid_lower_closed_form(15, 5, 2)?
    );
    Ok(())
}
