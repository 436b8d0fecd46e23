use atomci::model::{ModelSpec, Subshell, SymmetryChoice};
use atomci::solver::{evaluate, optimize_exponents, EnergyModel, OptimizeOptions};
use std::collections::BTreeMap;
use std::time::Instant;

struct Row {
    z: u32,
    pin: u32,
    term: &'static str,
    dim: usize,
    energy: f64,
    exponents: [Option<f64>; 9],
}

fn main() {
    let rows = [
        Row { z: 20, pin: 1, term: "3D", dim: 2, energy: -674.1634,
              exponents: [Some(19.68), Some(17.41), Some(16.13), Some(12.05), Some(10.38), Some(2.83), Some(5.43), None, Some(2.46)] },
        Row { z: 20, pin: 2, term: "1S", dim: 1, energy: -674.2442,
              exponents: [Some(19.68), Some(17.41), Some(16.13), Some(12.10), Some(10.38), None, Some(5.03), None, None] },
        Row { z: 21, pin: 1, term: "4F", dim: 3, energy: -756.9381,
              exponents: [Some(20.68), Some(18.42), Some(17.15), Some(12.99), Some(11.30), Some(8.26), Some(5.35), None, Some(6.24)] },
        Row { z: 21, pin: 2, term: "2D", dim: 2, energy: -756.9968,
              exponents: [Some(20.68), Some(18.42), Some(17.15), Some(13.06), Some(11.34), Some(10.07), Some(5.31), None, Some(8.46)] },
        Row { z: 22, pin: 1, term: "5F", dim: 8, energy: -845.3714,
              exponents: [Some(21.68), Some(19.43), Some(18.16), Some(13.89), Some(12.18), Some(9.91), Some(5.51), Some(1.45), Some(7.75)] },
        Row { z: 22, pin: 2, term: "3F", dim: 3, energy: -845.4210,
              exponents: [Some(21.68), Some(19.43), Some(18.16), Some(13.98), Some(12.23), Some(11.30), Some(5.52), None, Some(9.67)] },
        Row { z: 23, pin: 1, term: "6D", dim: 17, energy: -939.5952,
              exponents: [Some(22.68), Some(20.44), Some(19.17), Some(14.78), Some(13.04), Some(11.20), Some(5.61), Some(1.88), Some(8.93)] },
        Row { z: 23, pin: 2, term: "4F", dim: 8, energy: -939.6375,
              exponents: [Some(22.68), Some(20.44), Some(19.17), Some(14.86), Some(13.10), Some(12.36), Some(5.70), Some(5.25), Some(10.62)] },
        Row { z: 24, pin: 1, term: "7S", dim: 14, energy: -1039.7864,
              exponents: [Some(23.68), Some(21.44), Some(20.18), Some(15.64), Some(13.89), Some(12.37), Some(5.67), Some(9.51), Some(10.00)] },
        Row { z: 24, pin: 2, term: "5D", dim: 17, energy: -1039.7852,
              exponents: [Some(23.68), Some(21.44), Some(20.18), Some(15.74), Some(13.95), Some(13.36), Some(5.87), Some(0.93), Some(11.49)] },
    ];

    let only: Option<usize> = std::env::args().nth(1).map(|s| s.parse().unwrap());
    for (i, row) in rows.iter().enumerate() {
        if let Some(k) = only {
            if k != i {
                continue;
            }
        }
        let mut constraints = BTreeMap::new();
        constraints.insert(Subshell::new(4, 0), row.pin);
        let spec = ModelSpec {
            n_electrons: row.z,
            nuclear_charge: row.z as f64,
            min_shell: Subshell::new(3, 1),
            max_shell: Subshell::new(4, 2),
            occupation_constraints: constraints,
            symmetry: SymmetryChoice::Hund,
        };
        let t0 = Instant::now();
        let model = EnergyModel::new(&spec).unwrap();
        let term = format!("{}", model.subspace.term);
        let init: Vec<f64> = row.exponents.iter().map(|e| e.unwrap_or(1.0)).collect();
        let at = evaluate(&model, &init).unwrap();
        println!(
            "Z={} 4s{}  term {} (want {})  dim {} (want {})  E@pub {:.6} (pub {:.4}, diff {:+.2e})  [{:?}]",
            row.z, row.pin, term, row.term, model.dimension(), row.dim,
            at.energy, row.energy, at.energy - row.energy, t0.elapsed()
        );
        let t0 = Instant::now();
        let opt = optimize_exponents(&model, &init, &OptimizeOptions::default()).unwrap();
        println!(
            "    E* {:.6}  (<= pub+1e-3: {})  evals {}  converged {}  virial {:.6}  [{:?}]",
            opt.energy,
            opt.energy <= row.energy + 1e-3,
            opt.evaluations,
            opt.converged,
            opt.virial_ratio,
            t0.elapsed()
        );
        let shown: Vec<String> = opt
            .exponents
            .iter()
            .map(|(s, e)| match e {
                Some(v) => format!("{s}={v:.2}"),
                None => format!("{s}=-"),
            })
            .collect();
        println!("    exponents: {}", shown.join(" "));
        if row.z == 24 {
            for w in &opt.weights {
                let amps: Vec<String> = w
                    .amplitudes
                    .iter()
                    .map(|(l, a)| format!("{l}:{a:.4}"))
                    .collect();
                println!("    {}  weight {:.4}  [{}]", w.configuration, w.weight, amps.join(", "));
            }
        }
    }
}
