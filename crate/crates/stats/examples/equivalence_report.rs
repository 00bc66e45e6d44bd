//! Difference and equivalence tests on questionnaire-sized samples: two
//! success proportions and two sets of 1-6 ratings.
//!
//! ```text
//! cargo run -p multidm-stats --example equivalence_report
//! ```

use multidm_stats::{chi_squared_2x2, mann_whitney, tost, yuen_t, TostData, TostSpec};

fn main() -> multidm_stats::Result<()> {
    let (a_succ, a_n, b_succ, b_n) = (214, 245, 213, 248);
    let chi = chi_squared_2x2(a_succ, a_n, b_succ, b_n)?;
    let eq = tost(&TostData::Proportions { a_succ, a_n, b_succ, b_n }, &TostSpec::proportions())?;
    println!("success {a_succ}/{a_n} vs {b_succ}/{b_n}");
    println!("  chi-squared {:.3} (p = {:.3})", chi.statistic, chi.p);
    println!(
        "  TOST at ±{}: p_lo = {:.4}, p_hi = {:.4} -> {}",
        eq.epsilon,
        eq.p_lo,
        eq.p_hi,
        if eq.equivalent { "equivalent" } else { "not shown equivalent" }
    );

    let x: Vec<f64> = [5, 4, 5, 6, 3, 4, 5, 5, 2, 4, 6, 5, 4, 4, 5, 3, 5, 6, 4, 5].map(f64::from).to_vec();
    let y: Vec<f64> = [4, 5, 5, 6, 4, 3, 5, 4, 3, 4, 6, 5, 5, 4, 4, 3, 5, 5, 4, 6].map(f64::from).to_vec();
    let mw = mann_whitney(&x, &y)?;
    let yuen = yuen_t(&x, &y, 0.2)?;
    let eq = tost(&TostData::Likert { x, y }, &TostSpec::likert())?;
    println!("ratings (n = 20 each)");
    println!("  Mann-Whitney U = {} (p = {:.3})", mw.u, mw.p);
    println!("  Yuen t = {:.3}, df = {:.1}", yuen.statistic, yuen.df);
    println!(
        "  TOST at ±{} points: p = {:.3} -> {}{}",
        eq.epsilon,
        eq.p_tost,
        if eq.equivalent { "equivalent" } else { "not shown equivalent" },
        if eq.underpowered { " (sample too small for this margin)" } else { "" }
    );
    Ok(())
}
