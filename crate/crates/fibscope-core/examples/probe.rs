use fibscope_core::mapspec::parse_mapping;
use fibscope_core::numeric::{estimate_asymptotic_with_cloud, RadiusSchedule};

fn main() {
    let spec = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let mut sched = RadiusSchedule::default();
    sched.samples_per_radius = 32;
    let (report, cloud) = estimate_asymptotic_with_cloud(&spec, &sched, 42).unwrap();
    println!("verdict: {:?}", report.verdict);
    for d in &report.per_radius {
        println!(
            "radius {:>9}: attempts {} on_set {} retained {}",
            d.radius, d.attempts, d.on_set, d.retained
        );
    }
    println!("clusters: {}", report.clusters.len());
    for c in &report.clusters {
        println!("  center {:?} spread {:.3e} support {:?}", c.center, c.spread, c.support_radii);
        println!("  per-radius spread: {:?}", c.per_radius_spread);
    }
    println!("cloud len {}", cloud.len());
    println!("rejected {}", report.rejected_clusters);
}
