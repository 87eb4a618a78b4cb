//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use depthpress::dataio::Clip;
use depthpress::features::{entropy_feature, laws_histogram, lbp_histogram, FeatureConfig, Scheme, SchemeSet};
use depthpress::learn::{
    benchmark, dataset_from_rows, evaluate, train_gbt, train_svm, Mlp, ModelKind, ModelParams, TrainConfig,
};
use depthpress::pipeline::{build_datasets, intended_labels, label_clips};
use depthpress::pressure::{crisp_boundaries, thresholds};
use depthpress::reference::{DATASET_COUNTS, DEPTH_ENVELOPES};
use depthpress::rng::Rng;
use depthpress::roi::{DepthReducer, DepthStats};
use depthpress::synth::generate_corpus;
use depthpress::{BinaryMask, CupSize, GrayImage, PressureLevel, Quadrant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn default_corpus() -> &'static [Clip] {
    static CORPUS: OnceLock<Vec<Clip>> = OnceLock::new();
    CORPUS.get_or_init(|| generate_corpus(&DATASET_COUNTS, 0).expect("default corpus"))
}

fn published_range_reconciliation() -> Outcome {
    let mut worst: f64 = 0.0;
    for env in &DEPTH_ENVELOPES {
        let t =
            thresholds(&DepthStats::new(env.min, env.max).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let (low_med, med_high) = crisp_boundaries(&t);
        let typo = env.cup == CupSize::C && env.quadrant == Quadrant::LeftQ2;
        let high_start = if typo {
            check(env.high_start == 563.6, "Cup C Left_Q2 published HIGH start changed")?;
            check(
                med_high == 593.625,
                format!("Cup C Left_Q2 derived {med_high}, expected 593.625"),
            )?;
            593.625
        } else {
            env.high_start
        };
        for (published, derived) in [
            (env.low_end, low_med),
            (env.medium_start, low_med),
            (env.medium_end, med_high),
            (high_start, med_high),
        ] {
            let err = (published - derived).abs();
            worst = worst.max(err);
            check(
                err <= 0.06,
                format!(
                    "{} {}: published {published} vs derived {derived}",
                    env.cup, env.quadrant
                ),
            )?;
        }
    }
    Ok(format!(
        "12 rows, max deviation {worst:.3} mm; Cup C Left_Q2 HIGH start checked against 593.625"
    ))
}

fn threshold_vectors() -> Outcome {
    for ((min, max), want) in [
        ((762.0, 794.0), [770.0, 778.0, 786.0]),
        ((614.0, 658.0), [625.0, 636.0, 647.0]),
    ] {
        let t = thresholds(&DepthStats::new(min, max).unwrap()).map_err(|e| e.to_string())?;
        let got = [t.a1, t.a2, t.a3];
        check(got == want, format!("({min}, {max}) -> {got:?}, expected {want:?}"))?;
    }
    Ok("(762, 794) -> 770/778/786, (614, 658) -> 625/636/647".into())
}

fn random_image(rng: &mut Rng, w: usize, h: usize, levels: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.below(levels) as u8).unwrap()
}

fn feature_invariants() -> Outcome {
    let mut rng = Rng::new(2024);
    let full = BinaryMask::filled(32, 32, true).unwrap();
    let partial = BinaryMask::rect(32, 32, 4, 3, 29, 27).unwrap();

    // Entropy hand vector: counts {0:5, 128:3, 255:1}.
    let mut px = vec![0u8; 5];
    px.extend([128; 3]);
    px.push(255);
    let nine = GrayImage::new(3, 3, px).unwrap();
    let e = entropy_feature(&nine, &BinaryMask::filled(3, 3, true).unwrap()).unwrap();
    check((e - 1.35164).abs() < 1e-4, format!("entropy {e}"))?;

    let mut max_sum_err: f64 = 0.0;
    for i in 0..50 {
        // Strictly increasing remap of the 100 levels in use.
        let img = random_image(&mut rng, 32, 32, 100);
        let mut targets: Vec<u8> = (0..=255).collect();
        rng.shuffle(&mut targets);
        let mut targets = targets[..100].to_vec();
        targets.sort_unstable();
        let remapped = img.map(|&v| targets[v as usize]);
        let roi = if i % 2 == 0 { &full } else { &partial };
        let a = lbp_histogram(&img, roi).unwrap();
        check(
            a == lbp_histogram(&remapped, roi).unwrap(),
            format!("LBP remap image {i}"),
        )?;

        let img = random_image(&mut rng, 32, 32, 200);
        let offset = 1 + rng.below(55) as u8;
        let shifted = img.map(|&v| v + offset);
        let l = laws_histogram(&img, roi).unwrap();
        check(
            l == laws_histogram(&shifted, roi).unwrap(),
            format!("Laws offset image {i}"),
        )?;

        for chunk in l.chunks(16) {
            max_sum_err = max_sum_err.max((chunk.iter().sum::<f64>() - 1.0).abs());
        }
        max_sum_err = max_sum_err.max((a.iter().sum::<f64>() - 1.0).abs());
        check(l.iter().chain(&a).all(|&v| v >= 0.0), "negative histogram entry")?;
        let ent = entropy_feature(&img, roi).unwrap();
        check((0.0..=8.0).contains(&ent), format!("entropy {ent} out of range"))?;
    }
    check(max_sum_err < 1e-9, format!("histogram sum error {max_sum_err}"))?;
    Ok(format!(
        "entropy {e:.5}; 50 LBP remaps and 50 Laws offsets invariant; max sum error {max_sum_err:.1e}"
    ))
}

fn ann_gradient_check() -> Outcome {
    let mut rng = Rng::new(404);
    let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..5).map(|_| rng.normal()).collect()).collect();
    let labels: Vec<usize> = (0..10).map(|_| rng.below(3)).collect();
    let net = Mlp::init(5, 8, 405);
    let (_, analytic) = net.loss_and_gradient(&rows, &labels);
    let base = net.parameters();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + eps;
        probe.set_parameters(&p);
        let up = probe.loss(&rows, &labels);
        p[i] = base[i] - eps;
        probe.set_parameters(&p);
        let down = probe.loss(&rows, &labels);
        let numeric = (up - down) / (2.0 * eps);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    check(worst < 1e-4, format!("max relative error {worst:.2e}"))?;
    Ok(format!("{} parameters, max relative error {worst:.2e}", base.len()))
}

fn blobs(rng: &mut Rng, centres: &[([f64; 2], usize)], per: usize, sigma: f64) -> Vec<(Vec<f64>, PressureLevel)> {
    let mut out = Vec::new();
    for _ in 0..per {
        for &(c, k) in centres {
            out.push((
                vec![c[0] + sigma * rng.normal(), c[1] + sigma * rng.normal()],
                PressureLevel::from_index(k).unwrap(),
            ));
        }
    }
    out
}

fn classifier_sanity() -> Outcome {
    let cfg = TrainConfig::default();
    let mut rng = Rng::new(505);
    let triangle = [([0.0, 0.0], 0), ([5.0, 0.0], 1), ([2.5, 4.5], 2)];
    let train = blobs(&mut rng, &triangle, 100, 0.6);
    let test = blobs(&mut rng, &triangle, 100, 0.6);
    let data = dataset_from_rows(&train, &test).map_err(|e| e.to_string())?;
    let svm = train_svm(&data, &cfg).map_err(|e| e.to_string())?;
    let svm_acc = evaluate(&svm, &data.test).unwrap().accuracy;
    check(svm_acc >= 0.95, format!("SVM blob test accuracy {svm_acc}"))?;

    let noisy = blobs(&mut rng, &triangle, 60, 1.8);
    let gbt = train_gbt(&dataset_from_rows(&noisy, &[]).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let ModelParams::Gbt(ens) = &gbt.params else {
        return Err("GBT training returned another model".into());
    };
    check(ens.train_loss.len() == 101, "expected 100 rounds of loss")?;
    for (r, w) in ens.train_loss.windows(2).enumerate() {
        check(
            w[1] <= w[0] + 1e-12,
            format!("GBT loss rose at round {}: {} -> {}", r + 1, w[0], w[1]),
        )?;
    }

    let corners = [([-2.0, -2.0], 0), ([2.0, 2.0], 0), ([-2.0, 2.0], 2), ([2.0, -2.0], 2)];
    let xor = dataset_from_rows(&blobs(&mut rng, &corners, 50, 0.6), &[]).unwrap();
    let g = evaluate(&train_gbt(&xor, &cfg).unwrap(), &xor.train).unwrap().accuracy;
    let s = evaluate(&train_svm(&xor, &cfg).unwrap(), &xor.train).unwrap().accuracy;
    check(g >= 0.95, format!("GBT XOR train accuracy {g}"))?;
    check(s <= 0.75, format!("SVM XOR train accuracy {s}"))?;
    Ok(format!(
        "SVM blobs {svm_acc:.3}; GBT loss {:.4} -> {:.4} monotone; XOR GBT {g:.3} vs SVM {s:.3}",
        ens.train_loss[0], ens.train_loss[100]
    ))
}

fn label_recovery() -> Outcome {
    let clips = default_corpus();
    let labeling = label_clips(clips, DepthReducer::Median).map_err(|e| e.to_string())?;
    let mut intended = BTreeMap::new();
    for clip in clips {
        intended.insert(
            clip.id.as_str(),
            intended_labels(clip).ok_or("clip without ground truth")?,
        );
    }
    let total = labeling.frames.len();
    let agree = labeling
        .frames
        .iter()
        .filter(|f| f.label == Some(intended[f.clip.as_str()][f.frame_index]))
        .count();
    let rate = agree as f64 / total as f64;
    check(rate >= 0.95, format!("recovered {agree}/{total} = {rate:.4}"))?;
    Ok(format!("{agree}/{total} frames = {:.2}%", 100.0 * rate))
}

fn end_to_end_benchmark() -> Outcome {
    let clips = default_corpus();
    let labeling = label_clips(clips, DepthReducer::Median).map_err(|e| e.to_string())?;
    let law = SchemeSet::single(Scheme::Law);
    let lbp = SchemeSet::single(Scheme::Lbp);
    let both = SchemeSet::new(&[Scheme::Law, Scheme::Lbp]).unwrap();
    let data =
        build_datasets(clips, &labeling, &[law, lbp, both], &FeatureConfig::default()).map_err(|e| e.to_string())?;
    check(
        data[0].train.len() == 1210 && data[0].test.len() == 212,
        "corpus is not sized 1210/212",
    )?;
    let table = benchmark(&data, &[ModelKind::Svm], &TrainConfig::default()).map_err(|e| e.to_string())?;
    let acc = |s: &str| {
        table
            .find(s, "SVM")
            .map(|r| r.test_acc)
            .ok_or(format!("missing SVM {s} row"))
    };
    let (a_law, a_lbp, a_both) = (acc("Law")?, acc("LBP")?, acc("LawLBP")?);
    let chance = table.baseline().ok_or("missing baseline")?.test_acc;
    let summary = format!("chance {chance:.3}, SVM Law {a_law:.3}, LBP {a_lbp:.3}, LawLBP {a_both:.3}");
    check((chance - 1.0 / 3.0).abs() <= 0.03, format!("(a) {summary}"))?;
    check(a_law >= 0.55 && a_lbp >= 0.55, format!("(b) {summary}"))?;
    check(a_both >= a_law.max(a_lbp) - 0.05, format!("(c) {summary}"))?;
    Ok(summary)
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn cli_reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_depthpress");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let steps: [&[&str]; 7] = [
        &["generate", "--frames", "24", "--out", "data"],
        &["label", "--data", "data", "--out", "out"],
        &["extract", "--data", "data", "--out", "out", "--schemes", "law,lbp"],
        &[
            "train", "--data", "data", "--out", "out", "--model", "ann", "--scheme", "ShaLaw",
        ],
        &["eval", "--data", "data", "--out", "out"],
        &[
            "bench",
            "--data",
            "data",
            "--out",
            "out",
            "--schemes",
            "sha,law,lbp,lawlbp",
        ],
        &["report", "--out", "out"],
    ];
    let mut stdouts = [Vec::new(), Vec::new()];
    for (run, stdout) in stdouts.iter_mut().enumerate() {
        let dir = tmp.path().join(format!("run{run}"));
        std::fs::create_dir_all(&dir).unwrap();
        for args in steps {
            let out = Command::new(bin)
                .args(["--seed", "7"])
                .args(args)
                .current_dir(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            check(
                out.status.success(),
                format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr).trim()),
            )?;
            stdout.push(out.stdout);
        }
    }
    for (i, args) in steps.iter().enumerate() {
        check(stdouts[0][i] == stdouts[1][i], format!("{} stdout differs", args[0]))?;
    }
    let a = snapshot(&tmp.path().join("run0"));
    let b = snapshot(&tmp.path().join("run1"));
    check(a.keys().eq(b.keys()), "output trees list different files")?;
    if let Some(name) = a.keys().find(|k| a[*k] != b[*k]) {
        return Err(format!("{name} differs between runs"));
    }
    for name in [
        "labels.json",
        "features.json",
        "model.json",
        "eval.json",
        "report.csv",
        "report.json",
        "report.txt",
    ] {
        check(a.contains_key(&format!("out/{name}")), format!("out/{name} missing"))?;
    }
    Ok(format!("7 subcommands x 2 runs, {} files byte-identical", a.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "published depth ranges",
            published_range_reconciliation,
            Duration::from_secs(1),
        ),
        ("threshold unit vectors", threshold_vectors, Duration::from_secs(1)),
        ("feature invariants", feature_invariants, Duration::from_secs(30)),
        ("ANN gradient check", ann_gradient_check, Duration::from_secs(10)),
        ("classifier sanity", classifier_sanity, Duration::from_secs(60)),
        ("label recovery", label_recovery, Duration::from_secs(60)),
        ("end-to-end benchmark", end_to_end_benchmark, Duration::from_secs(600)),
        ("CLI reproducibility", cli_reproducibility, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *budget => Err(format!("{msg}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {} [{name}]: PASS ({msg}) in {elapsed:.2?}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({msg}) in {elapsed:.2?}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
