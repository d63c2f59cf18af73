use darc::arm::*;
use darc::demos::*;
use darc::rewards::TaskKind;
use darc::Vector2;
use std::time::Instant;

fn main() {
    let p = ArmParams::default();
    let gains = PdGains { kp: Vector2::new(10.0, 6.0), kd: Vector2::new(0.5, 0.1) };
    let obstacle = Obstacle::default();
    for seed in [7u64, 13, 42, 99] {
        let t0 = Instant::now();
        let targets = sample_training_targets(&p, TaskKind::ReachObstacle, Some(&obstacle), 80, seed);
        let mut fails = 0; let mut retried = 0;
        for t in &targets {
            let mut ok = false;
            for attempt in 0..20 {
                if pd_demonstrate_avoiding(&p, t, &gains, 100, &obstacle, attempt).is_ok() { ok = true; if attempt > 0 { retried += 1; } break; }
            }
            if !ok { fails += 1; println!("  still failing: ({:.3},{:.3}) angle={:.0}", t[0], t[1], t[1].atan2(t[0]).to_degrees()); }
        }
        println!("obstacle seed {seed}: fails={fails}/80 retried={retried} ({:.1?})", t0.elapsed());
    }
}
