// scratch probe: capacity vs target across lunch means and compositions
use schoolnet::degree_model::{sample_degree_realization, DegreeModelParams};
use schoolnet::ergm::{simulate_friendship, ErgmCoefficients};
use schoolnet::population::{generate_synthetic_roster, RosterConfig};
use schoolnet::rng::stream_rng;
use schoolnet::season::build_break_lunch_layer;

fn main() {
    for (lunch, black) in [(8.5f64, 0.45f64), (8.5, 0.50), (7.5, 0.45), (10.8, 0.45)] {
        for n in [600usize, 1074] {
            let white = 0.70 - black;
            let roster = generate_synthetic_roster(
                &RosterConfig {
                    n,
                    race_weights: [white, black, 0.10, 0.06, 0.13, 0.01],
                    ..Default::default()
                },
                11,
            )
            .unwrap();
            let mut rng = stream_rng(12, &[]);
            let mut coef = ErgmCoefficients::bundled();
            coef.edges += (1074.0f64 / n as f64).ln();
            let friendship = simulate_friendship(&roster, &coef, &mut rng);
            let mean_deg = 2.0 * friendship.edge_count() as f64 / n as f64;
            let params = DegreeModelParams { lunch_mean: lunch, ..Default::default() };
            let mut rng2 = stream_rng(3, &[]);
            let mut ok = 0;
            let mut ratio_sum = 0.0;
            let trials = 10;
            for _ in 0..trials {
                let real = loop {
                    let r = sample_degree_realization(&params, &friendship.degrees(), &mut rng2);
                    let s: u64 = (0..n).map(|i| r.break_lunch_degree(i)).sum();
                    if s % 2 == 0 { break r; }
                };
                let degrees: Vec<u64> = (0..n).map(|i| real.break_lunch_degree(i)).collect();
                let total: u64 = degrees.iter().sum();
                let t = (0.68 * total as f64 / 2.0).round() as u64;
                let cap_node: u64 = (0..n)
                    .map(|i| degrees[i].min(10 * friendship.degree(i) as u64))
                    .sum::<u64>() / 2;
                ratio_sum += cap_node as f64 / t as f64;
                if build_break_lunch_layer(&friendship, &real, 0.68, &mut rng2).is_ok() {
                    ok += 1;
                }
            }
            println!(
                "lunch={lunch} black={black} n={n}: mean_deg={mean_deg:.2} capacity/T={:.3} matched {ok}/{trials}",
                ratio_sum / trials as f64
            );
        }
    }
}
