use darc::ppo::pointmass::{run_training, smoke_config};

fn main() {
    for seed in [0u64, 1, 7, 42, 99] {
        for updates in [40, 80] {
            let returns = run_training(&smoke_config(), updates, seed).unwrap();
            let n = returns.len();
            let first: f64 = returns[..100].iter().sum::<f64>() / 100.0;
            let last: f64 = returns[n - 100..].iter().sum::<f64>() / 100.0;
            print!("  seed {seed} u{updates}: ratio {:.2}", last / first);
        }
        println!();
    }
}
