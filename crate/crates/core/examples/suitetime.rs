fn main() {
    let args: Vec<String> = std::env::args().collect();
    let ids: Vec<usize> = args[1..].iter().map(|a| a.parse().unwrap()).collect();
    for id in ids {
        let rep = grasscayley::suite::run_criterion(id);
        eprintln!("criterion {} [{}ms] pass={}", rep.id, rep.wall_ms, rep.pass);
        for c in &rep.checks {
            eprintln!("  [{}] {} -- {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.details);
        }
    }
}
