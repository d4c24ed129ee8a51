//! Climatology, standardized anomalies and the drought vulnerability index
//! on hand-made numbers.

use semdrought::forecast::{classify_severity, compute_dvi, empirical_percentile, standardized_anomaly, DviWeights, Thresholds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = DviWeights::default();
    let thresholds = Thresholds::default();

    // June baseline of daily rainfall (mm) and soil moisture (%).
    let rain = [2.1, 1.4, 2.8, 1.9, 2.2, 1.7, 2.5, 2.0];
    let mut soil = vec![22.0, 25.5, 19.8, 24.1, 21.7, 23.3, 26.0, 20.9];
    soil.sort_by(f64::total_cmp);
    let mean = rain.iter().sum::<f64>() / rain.len() as f64;
    let sd = (rain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rain.len() - 1) as f64).sqrt();

    println!("{:>8} {:>8} {:>8} {:>6} {:>6}  severity", "rain", "soil", "z_p", "p_sm", "dvi");
    for (this_rain, this_soil, z_temp, ik) in [(2.0, 23.0, 0.0, 0.0), (1.2, 20.5, 0.8, 0.3), (0.6, 18.0, 1.5, 1.0)] {
        let z_p = standardized_anomaly(this_rain, mean, sd)?;
        let p_sm = empirical_percentile(this_soil, &soil)?;
        let dvi = compute_dvi(z_p, p_sm, z_temp, ik, &weights)?;
        println!("{this_rain:>8.1} {this_soil:>8.1} {z_p:>+8.2} {p_sm:>6.2} {dvi:>6.3}  {:?}", classify_severity(dvi, &thresholds));
    }

    let neutral = compute_dvi(0.0, 0.5, 0.0, 0.0, &weights)?;
    println!("\nneutral inputs give {neutral:.2}, classified {:?}", classify_severity(neutral, &thresholds));
    Ok(())
}
