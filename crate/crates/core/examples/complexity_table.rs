//! Operation counts of the closed-form estimator against the grid searches.

use ura_esprit::bench::{complexity_table, search_dims};

fn main() {
    let (m, t, k) = (100u128, 500u128, 2u32);
    let d = search_dims(k, 11, 10);
    println!("D1 = {}, D2 = {}", d.d1, d.d2);
    let rows = complexity_table(m, t, k, 11, 10);
    for r in &rows {
        println!("{:>9}: {:>18} ({:.3e})", r.method.name(), r.count, r.count as f64);
    }
    let ratio = rows[0].count as f64 / rows[3].count as f64;
    println!("proposed / dispare = {:.4}%", 100.0 * ratio);
}
