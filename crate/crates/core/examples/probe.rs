use coldplasma::acceptance::run_criterion;
fn main() {
    let ids: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    for id in ids {
        let t0 = std::time::Instant::now();
        let o = run_criterion(id);
        println!("{}  ({:.1} s)", o.line(), t0.elapsed().as_secs_f64());
    }
}
