//! Sample-size formulas behind the learner's guarantees.

use super::LearnError;

/// Slack applied before `ceil` so that values which are integers in exact
/// arithmetic (e.g. `1 / (0.1 * 0.25) = 40`) do not round up because of
/// binary floating point.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_count(x: f64) -> u64 {
    (x - CEIL_SLACK).ceil().max(0.0) as u64
}

fn check_open_unit(name: &'static str, value: f64) -> Result<(), LearnError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(LearnError::Probability { name, value })
    }
}

/// Probability that `attempts` exploration walks record every one of the
/// `d^r` length-`r` paths out of a landmark:
/// `[1 - (1 - (alpha/d)^r)^attempts]^(d^r)`.
pub fn selection_success_probability(alpha: f64, d: usize, r: usize, attempts: u64) -> f64 {
    let per_attempt = (alpha / d as f64).powi(r as i32);
    let paths = (d as f64).powi(r as i32);
    let miss_one = (1.0 - per_attempt).powf(attempts as f64);
    (1.0 - miss_one).powf(paths)
}

/// Least number of exploration walks `n` with
/// `1 - delta_s <= [1 - (1 - (alpha/d)^r)^n]^(d^r)`.
///
/// Starts from the closed form
/// `ceil(ln(1 - (1 - delta_s)^(d^-r)) / ln(1 - (alpha/d)^r))` and then
/// nudges it so the inequality holds at `n` and fails at `n - 1`.
/// `r = 0` means there is nothing to explore and returns 0.
pub fn num_selection_attempts(alpha: f64, d: usize, r: usize, delta_s: f64) -> Result<u64, LearnError> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(LearnError::Alpha(alpha));
    }
    if d == 0 {
        return Err(LearnError::Degree);
    }
    check_open_unit("delta_s", delta_s)?;
    if r == 0 {
        return Ok(0);
    }
    let per_attempt = (alpha / d as f64).powi(r as i32);
    if per_attempt >= 1.0 {
        return Ok(1);
    }
    let paths = (d as f64).powi(r as i32);
    // 1 - (1 - delta_s)^(1/paths), computed without cancellation.
    let target_miss = -((-delta_s).ln_1p() / paths).exp_m1();
    let estimate = target_miss.ln() / (-per_attempt).ln_1p();
    let mut n = ceil_count(estimate).max(1);
    let ok = |n: u64| selection_success_probability(alpha, d, r, n) >= 1.0 - delta_s;
    while !ok(n) {
        n += 1;
    }
    while n > 1 && ok(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// Filtering traversals per candidate: `ceil(1 / (delta_fl * (2 gamma - 1)^2))`.
pub fn num_filter_traversals(gamma: f64, delta_f_local: f64) -> Result<u64, LearnError> {
    if !(gamma > 0.5 && gamma <= 1.0) {
        return Err(LearnError::Gamma(gamma));
    }
    check_open_unit("delta_f_local", delta_f_local)?;
    let gap = 2.0 * gamma - 1.0;
    Ok(ceil_count(1.0 / (delta_f_local * gap * gap)).max(1))
}

/// Expected fraction of reverse-retrace experiments that hit for a real
/// path of length `k` and for a candidate with one recording error.
pub fn reverse_hit_rates(alpha: f64, k: usize) -> (f64, f64) {
    assert!(k >= 1, "candidate paths have at least one edge");
    let real = alpha.powi(k as i32);
    let false_path = alpha.powi(k as i32 - 1) * (1.0 - alpha);
    (real, false_path)
}

/// Acceptance threshold on hits for `n` reverse experiments: the midpoint
/// `n (alpha^k + alpha^(k-1) (1 - alpha)) / 2`.
pub fn reverse_threshold(alpha: f64, k: usize, n: u64) -> f64 {
    let (real, false_path) = reverse_hit_rates(alpha, k);
    n as f64 * (real + false_path) / 2.0
}

/// Reverse experiments per candidate. The two hit rates sit `2 * gap`
/// apart with the threshold in the middle; Chebyshev with variance at most
/// `1/4` gives `ceil(1 / (4 delta_fl gap^2))`.
pub fn num_reverse_experiments(alpha: f64, k: usize, delta_f_local: f64) -> Result<u64, LearnError> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(LearnError::Alpha(alpha));
    }
    check_open_unit("delta_f_local", delta_f_local)?;
    let (real, false_path) = reverse_hit_rates(alpha, k.max(1));
    let gap = (real - false_path) / 2.0;
    Ok(ceil_count(1.0 / (4.0 * delta_f_local * gap * gap)).max(1))
}

/// Random-walk length for landmark identification on a graph with at most
/// `vertices` vertices and `edges` edges: segments of the expected cover
/// time bound `2 |E| (|V| - 1)`, repeated `ceil(log2(1 / delta_i))` times
/// (at least once). Each segment covers with probability at least 1/2.
pub fn identification_walk_length(vertices: usize, edges: usize, delta_i: f64) -> Result<u64, LearnError> {
    if !(delta_i > 0.0 && delta_i <= 1.0) {
        return Err(LearnError::Probability { name: "delta_i", value: delta_i });
    }
    let segment = 2 * edges as u64 * vertices.saturating_sub(1) as u64;
    let segments = ceil_count((1.0 / delta_i).log2()).max(1);
    Ok(segment * segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct substitution into the selection inequality, written
    /// independently of the closed form.
    fn inequality_holds(alpha: f64, d: usize, r: usize, delta_s: f64, n: u64) -> bool {
        let mut miss = 1.0;
        for _ in 0..n {
            miss *= 1.0 - (alpha / d as f64).powi(r as i32);
        }
        let mut all = 1.0;
        for _ in 0..d.pow(r as u32) {
            all *= 1.0 - miss;
        }
        1.0 - delta_s <= all
    }

    #[test]
    fn selection_attempts_examples() {
        assert_eq!(num_selection_attempts(0.9, 4, 0, 0.1).unwrap(), 0);
        let n = num_selection_attempts(0.9, 4, 1, 0.1).unwrap();
        assert_eq!(n, 15);
        assert!(inequality_holds(0.9, 4, 1, 0.1, 15));
        assert!(!inequality_holds(0.9, 4, 1, 0.1, 14));
    }

    #[test]
    fn selection_attempts_are_minimal() {
        for &(alpha, d, r, delta) in
            &[(0.95, 4, 1, 0.01), (0.95, 4, 2, 0.001), (0.7, 3, 3, 0.2), (0.6, 2, 4, 0.05), (1.0, 4, 2, 0.1)]
        {
            let n = num_selection_attempts(alpha, d, r, delta).unwrap();
            assert!(inequality_holds(alpha, d, r, delta, n), "{alpha} {d} {r} {delta}");
            assert!(!inequality_holds(alpha, d, r, delta, n - 1), "{alpha} {d} {r} {delta}");
        }
    }

    #[test]
    fn selection_attempts_diverge_as_delta_shrinks() {
        let mut prev = 0;
        for k in 1..10 {
            let n = num_selection_attempts(0.9, 4, 2, 10f64.powi(-k)).unwrap();
            assert!(n > prev);
            prev = n;
        }
        assert!(prev > 300);
    }

    #[test]
    fn single_path_world_needs_one_attempt() {
        assert_eq!(num_selection_attempts(1.0, 1, 3, 0.1).unwrap(), 1);
    }

    #[test]
    fn filter_traversal_examples() {
        assert_eq!(num_filter_traversals(0.75, 0.1).unwrap(), 40);
        assert_eq!(num_filter_traversals(1.0, 0.5).unwrap(), 2);
        assert!(matches!(num_filter_traversals(0.5, 0.1), Err(LearnError::Gamma(_))));
        assert!(num_filter_traversals(0.5 + 1e-6, 0.1).unwrap() > 1_000_000_000);
    }

    #[test]
    fn bad_budgets_are_rejected() {
        assert!(num_filter_traversals(0.8, 0.0).is_err());
        assert!(num_selection_attempts(0.9, 4, 1, 1.0).is_err());
        assert!(num_selection_attempts(0.4, 4, 1, 0.1).is_err());
        assert!(identification_walk_length(10, 15, 0.0).is_err());
    }

    #[test]
    fn identification_length_example() {
        assert_eq!(identification_walk_length(10, 15, 0.1).unwrap(), 1080);
        assert_eq!(identification_walk_length(10, 15, 0.999).unwrap(), 270);
        assert_eq!(identification_walk_length(10, 15, 0.25).unwrap(), 540);
    }

    #[test]
    fn reverse_rates() {
        let (real, fake) = reverse_hit_rates(0.9, 3);
        assert!((real * 1000.0 - 729.0).abs() < 1e-9);
        assert!((fake * 1000.0 - 81.0).abs() < 1e-9);
        assert!((reverse_threshold(0.9, 3, 1000) - 405.0).abs() < 1e-9);
        let (r1, f1) = reverse_hit_rates(0.8, 1);
        assert!((r1 - 0.8).abs() < 1e-12 && (f1 - 0.2).abs() < 1e-12);
        assert_eq!(reverse_hit_rates(1.0, 4), (1.0, 0.0));
        // gap 0.5 at alpha = 1 gives 1 / delta
        assert_eq!(num_reverse_experiments(1.0, 3, 0.1).unwrap(), 10);
    }
}
