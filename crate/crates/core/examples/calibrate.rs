//! Scratch calibration for fixtures (not shipped).
use rhlearn_core::dataset::*;
use rhlearn_core::learning::*;
use rhlearn_core::regression::RegressionConfig;

fn cluster_acc(x: &SampleMatrix, labels: &[usize], method: &str, beta: f64, t: usize, k: usize, seed: u64) -> f64 {
    let result = match method {
        "l1" => rhsc(x, &RegressionConfig::l1(beta).unwrap(), t, k, seed).unwrap(),
        "l2" => rhsc(x, &RegressionConfig::l2(beta).unwrap(), t, k, seed).unwrap(),
        _ => knn_spectral_clustering(x, t, k, seed).unwrap(),
    };
    clustering_accuracy(&result.labels, labels).unwrap()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("blobs");

    if mode == "blobs" {
        let ds = generate_blobs(3, 50, 10, 20.0, 0.5, 1).unwrap();
        for (m, beta) in [("l1", 0.1), ("l1", 0.01), ("l2", 0.1), ("l2", 0.001), ("knn", 0.0)] {
            for t in [5usize, 8] {
                let acc = cluster_acc(ds.samples(), ds.labels(), m, beta, t, 3, 1);
                let result = match m {
                    "l1" => rhsc(ds.samples(), &RegressionConfig::l1(beta).unwrap(), t, 3, 1).unwrap(),
                    "l2" => rhsc(ds.samples(), &RegressionConfig::l2(beta).unwrap(), t, 3, 1).unwrap(),
                    _ => knn_spectral_clustering(ds.samples(), t, 3, 1).unwrap(),
                };
                let info = nmi(&result.labels, ds.labels()).unwrap();
                println!("blobs {m} beta={beta} t={t}: acc={acc:.4} nmi={info:.4}");
            }
        }
        // transduction
        for (m, beta) in [("l1", 0.1), ("l2", 0.1), ("l1", 0.001), ("l2", 0.001)] {
            let cfg = if m == "l1" { RegressionConfig::l1(beta).unwrap() } else { RegressionConfig::l2(beta).unwrap() };
            let graph = build_graph(ds.samples(), GraphMethod::Regression(&cfg), 5, GraphOptions::default()).unwrap();
            let mask = stratified_split(ds.labels(), 0.5, 1).unwrap();
            let y = LabelMatrix::from_labels(ds.labels(), &mask, 3).unwrap();
            let f = transduce(&graph.laplacian, &y, 10.0).unwrap();
            let pred = classify(&f);
            let test: Vec<usize> = (0..150).filter(|&i| !mask[i]).collect();
            let err = test.iter().filter(|&&i| pred[i] != ds.labels()[i]).count() as f64 / test.len() as f64;
            println!("transduce {m} beta={beta}: err={err:.4}");
        }
    } else {
        // noise calibration: args: noise <gsig> <lo> <hi> <beta_l1> <beta_l2> <t>
        let gsig: f64 = args[2].parse().unwrap();
        let lo: f64 = args[3].parse().unwrap();
        let hi: f64 = args[4].parse().unwrap();
        let bl1: f64 = args[5].parse().unwrap();
        let bl2: f64 = args[6].parse().unwrap();
        let t: usize = args[7].parse().unwrap();
        let noise_seed: u64 = args.get(8).map(|s| s.parse().unwrap()).unwrap_or(11);
        let ds = generate_union_of_subspaces(3, 2, 30, 30, gsig, 11).unwrap();
        let mut all_ok = true;
        for level in [0.0, 0.1, 0.2, 0.3] {
            let spec = NoiseSpec::new(level, lo, hi, noise_seed).unwrap();
            let noisy = inject_salt_pepper(ds.samples(), &spec);
            let a1 = cluster_acc(&noisy, ds.labels(), "l1", bl1, t, 3, 11);
            let a2 = cluster_acc(&noisy, ds.labels(), "l2", bl2, t, 3, 11);
            let ak = cluster_acc(&noisy, ds.labels(), "knn", 0.0, t, 3, 11);
            let mut ok = a1 >= ak - 0.02 && a2 >= ak - 0.02;
            if level == 0.3 { ok = ok && a1 > ak && a2 > ak; }
            all_ok &= ok;
            println!("level={level}: l1={a1:.4} l2={a2:.4} knn={ak:.4} {}", if ok {"OK"} else {"FAIL"});
        }
        println!("{}", if all_ok {"ALL PASS"} else {"SOME FAIL"});
    }
}
