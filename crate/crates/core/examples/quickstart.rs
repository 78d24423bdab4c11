use pood::{epd, fit_threshold, flag_scores, ReferenceScore, ThresholdPolicy};

fn main() -> pood::Result<()> {
    let id_scores = vec![0.11, 0.12, 0.13, 0.19, 0.15];
    let threshold = fit_threshold(&id_scores, ThresholdPolicy::default())?;

    let cohort_scores = vec![0.14, 0.31];
    let cohort_perf = vec![0.81, 0.22];
    let flags = flag_scores(&cohort_scores, threshold);
    let drop = epd(&cohort_perf, &flags, ReferenceScore::external(0.9)?)?;
    println!(
        "EPD = {:.3} ({} of {} retained)",
        drop.value, drop.n_retained, drop.n_total
    );
    Ok(())
}
