//! Repeated stratified CV of two models on shared fold plans, followed by
//! the corrected paired t-test on each metric.

use carebench::classifiers::ModelSpec;
use carebench::evaluation::{corrected_paired_ttest, cross_validate};
use carebench::synthetic::self_care_like;

fn main() {
    let ds = self_care_like(3);
    let lineup = ModelSpec::standard_lineup();
    let (a, b) = (&lineup[0], &lineup[2]);
    let scores_a = cross_validate(a, &ds, 10, 10, 42).unwrap();
    let scores_b = cross_validate(b, &ds, 10, 10, 42).unwrap();
    for (sa, sb) in scores_a.iter().zip(&scores_b) {
        let cmp = corrected_paired_ttest(sa, sb, 0.05).unwrap();
        println!(
            "{:?}: {} {:.4} vs {} {:.4}  t = {:+.3}, p = {:.4}, {:?}",
            sa.metric,
            a.display_name(),
            sa.mean(),
            b.display_name(),
            sb.mean(),
            cmp.t_statistic,
            cmp.p_value,
            cmp.verdict,
        );
    }
}
