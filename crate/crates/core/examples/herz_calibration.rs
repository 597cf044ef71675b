//! Brute-force sweep behind the frozen Herz threshold: the largest ratio
//! `((Mf)** - (Mf)*) / (Sf)**` over 1000 seeded random martingales per depth.

use symineq::martingale::{herz_grid, herz_ratio, random_martingale};

fn main() {
    let grid = herz_grid();
    let seeds: Vec<u64> = (0..1000).collect();
    let mut overall: f64 = 0.0;
    for depth in 4..=12 {
        let ratios = symineq::par::map(&seeds, |&s| herz_ratio(&random_martingale(s, depth), &grid));
        let sup = ratios.iter().copied().fold(0.0, f64::max);
        overall = overall.max(sup);
        println!("depth {depth:2}: sup ratio {sup:.6}");
    }
    println!("overall sup {overall:.6}, threshold (x1.5) {:.6}", 1.5 * overall);
}
