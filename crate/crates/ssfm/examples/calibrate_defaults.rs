//! One-off: measures per-format optimum launch SNRs with the split-step
//! engine and fits the NLI surrogate, to pin the crate's default parameters.

use gs4d_core::catalog::build_catalog_format;
use gs4d_core::linkmodel::{calibrate_surrogate, CalibrationSample};
use gs4d_core::LinkSpec;
use gs4d_ssfm::{run_transmission, SimConfig};

/// Quadratic-vertex refinement of the best point on a uniform sweep.
fn refine(p_dbm: &[f64], snr_db: &[f64]) -> (f64, f64) {
    let mut best = 0usize;
    for (i, &v) in snr_db.iter().enumerate() {
        if v > snr_db[best] {
            best = i;
        }
    }
    if best == 0 || best == snr_db.len() - 1 {
        return (p_dbm[best], snr_db[best]);
    }
    let (y0, y1, y2) = (snr_db[best - 1], snr_db[best], snr_db[best + 1]);
    let h = p_dbm[1] - p_dbm[0];
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (p_dbm[best], y1);
    }
    let d = 0.5 * (y0 - y2) / denom;
    let x = p_dbm[best] + d * h;
    let y = y1 - 0.25 * (y0 - y2) * d;
    (x, y)
}

fn sweep(label: &str, name: &str, cfg: &SimConfig, grid: &[f64]) -> (f64, f64) {
    let c = build_catalog_format(name, None).unwrap();
    let snrs: Vec<f64> = grid
        .iter()
        .map(|&p| {
            let mut c2 = cfg.clone();
            c2.launch_dbm = p;
            run_transmission(&c, &c2).unwrap().0
        })
        .collect();
    let (p_opt, snr_opt) = refine(grid, &snrs);
    println!("{label}: sweep {snrs:?}");
    println!("{label}: P_opt {p_opt:.2} dBm, SNR_opt {snr_opt:.3} dB");
    (p_opt, snr_opt)
}

fn main() {
    let mut desk = SimConfig::desk_scale();
    desk.seed = 101;
    let grid: Vec<f64> = (-2..=6).map(|k| k as f64).collect();

    let formats = ["PM-QPSK", "PM-16QAM", "PM-64QAM", "PS-QPSK"];
    let mut samples = Vec::new();
    for name in formats {
        let (_, snr_opt) = sweep(name, name, &desk, &grid);
        let mom = build_catalog_format(name, None)
            .unwrap()
            .moments()
            .unwrap();
        println!("{name}: kurt {:.4} cross {:.4}", mom.kurt_excess, mom.cross4);
        samples.push(CalibrationSample {
            moments: mom,
            snr_opt_db: snr_opt,
        });
    }

    // Span-count scaling: PM-16QAM on 1 span vs 3 spans pins epsilon via
    // eta_tot/n = eta_span * n^eps.
    let mut one = desk.clone();
    one.link = one.link.with_spans(1);
    let (_, snr1) = sweep("PM-16QAM (1 span)", "PM-16QAM", &one, &grid);
    let a1 = gs4d_core::linkmodel::ase_total(&one.link);
    let a3 = gs4d_core::linkmodel::ase_total(&desk.link);
    let lin = |db: f64| 10.0f64.powf(db / 10.0);
    let eta1 = 4.0 / (27.0 * a1 * a1 * lin(snr1).powi(3));
    let eta3 = 4.0 / (27.0 * a3 * a3 * lin(samples[1].snr_opt_db).powi(3));
    let eps = ((eta3 / (3.0 * eta1)).ln() / 3.0f64.ln()).max(0.0);
    println!("eta1 {eta1:.4} eta3 {eta3:.4} -> epsilon {eps:.4}");

    let link3: LinkSpec = desk.link;
    let fit = calibrate_surrogate(&samples, &link3, eps).unwrap();
    println!(
        "fitted: eta0 {:.6}, k_kurt {:.6}, k_cross {:.6}, epsilon {:.6}",
        fit.params.eta0, fit.params.k_kurt, fit.params.k_cross, fit.params.epsilon
    );
    println!("residuals: {:?}", fit.residuals);
}
