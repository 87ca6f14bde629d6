//! Das-Dennis reference directions on the unit simplex.

/// Number of Das-Dennis points for `n_objectives` and `partitions`:
/// `C(partitions + n - 1, n - 1)`.
pub fn reference_count(n_objectives: usize, partitions: usize) -> usize {
    let n = n_objectives;
    if n == 0 {
        return 0;
    }
    let mut count: u128 = 1;
    for i in 0..(n - 1) {
        count = count * (partitions + i + 1) as u128 / (i + 1) as u128;
    }
    count.min(usize::MAX as u128) as usize
}

/// Structured simplex-lattice directions with the given number of gaps per
/// axis. Every direction sums to 1.
pub fn das_dennis(n_objectives: usize, partitions: usize) -> Vec<Vec<f64>> {
    assert!(n_objectives >= 1);
    if n_objectives == 1 {
        return vec![vec![1.0]];
    }
    let mut directions = Vec::with_capacity(reference_count(n_objectives, partitions));
    let mut current = vec![0.0; n_objectives];
    recurse(&mut directions, &mut current, partitions, partitions, 0);
    directions
}

fn recurse(
    out: &mut Vec<Vec<f64>>,
    current: &mut Vec<f64>,
    partitions: usize,
    remaining: usize,
    depth: usize,
) {
    if depth == current.len() - 1 {
        current[depth] = remaining as f64 / partitions as f64;
        out.push(current.clone());
    } else {
        for i in 0..=remaining {
            current[depth] = i as f64 / partitions as f64;
            recurse(out, current, partitions, remaining - i, depth + 1);
        }
    }
}

/// Default gap count: the largest partition number whose reference-point
/// count stays at or below 120 (which picks `p = 3` for eight objectives).
pub fn default_partitions(n_objectives: usize) -> usize {
    partitions_within(n_objectives, 120)
}

/// Largest partition number whose reference count stays at or below `cap`.
pub fn partitions_within(n_objectives: usize, cap: usize) -> usize {
    if n_objectives <= 1 {
        return 1;
    }
    let mut p = 1;
    while p < 200 && reference_count(n_objectives, p + 1) <= cap {
        p += 1;
    }
    p
}
