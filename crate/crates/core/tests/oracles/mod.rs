//! Reference implementations used only by tests. They are written to be
//! obviously correct rather than fast, and share no code with the crate.
#![allow(dead_code)]

/// Chunk plan by exhaustive search: split at every sentence that exceeds
/// the limit, then, for each remaining run, enumerate every contiguous
/// partition and keep the one with the fewest groups among those whose
/// groups all fit and whose sizes are non-increasing and differ by at most
/// one. Returns (group sizes, oversized flags).
pub fn chunk_plan(counts: &[usize], limit: usize) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    for &c in counts {
        if c > limit {
            out.extend(best_partition(&run, limit).into_iter().map(|s| (s, false)));
            run.clear();
            out.push((1, true));
        } else {
            run.push(c);
        }
    }
    out.extend(best_partition(&run, limit).into_iter().map(|s| (s, false)));
    out
}

fn best_partition(run: &[usize], limit: usize) -> Vec<usize> {
    let n = run.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best: Option<Vec<usize>> = None;
    // Bit i of `cuts` set means a boundary after position i.
    for cuts in 0u32..(1 << (n - 1)) {
        let mut sizes = Vec::new();
        let mut sums = Vec::new();
        let (mut size, mut sum) = (0, 0);
        for (i, &c) in run.iter().enumerate() {
            size += 1;
            sum += c;
            if i == n - 1 || cuts & (1 << i) != 0 {
                sizes.push(size);
                sums.push(sum);
                size = 0;
                sum = 0;
            }
        }
        let fits = sums.iter().all(|&s| s <= limit);
        let non_increasing = sizes.windows(2).all(|w| w[0] >= w[1]);
        let even = sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1;
        if fits && non_increasing && even && best.as_ref().is_none_or(|b| sizes.len() < b.len()) {
            best = Some(sizes);
        }
    }
    best.expect("singleton groups always fit")
}

/// Cohen's kappa from the 2x2 contingency table, using the closed form
/// 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)). Returns None when the
/// denominator vanishes (both raters constant on the same class).
pub fn kappa(x: &[bool], y: &[bool]) -> Option<f64> {
    let (mut a, mut b, mut c, mut d) = (0i64, 0i64, 0i64, 0i64);
    for (&p, &q) in x.iter().zip(y) {
        match (p, q) {
            (true, true) => a += 1,
            (true, false) => b += 1,
            (false, true) => c += 1,
            (false, false) => d += 1,
        }
    }
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0 {
        None
    } else {
        Some(2.0 * (a * d - b * c) as f64 / den as f64)
    }
}

/// Fraction of terms that occur (lowercased, whitespace-collapsed) in at
/// least one of `texts`.
pub fn coverage(terms: &[&str], texts: &[&str]) -> f64 {
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let texts: Vec<String> = texts.iter().map(|t| norm(t)).collect();
    let hit = terms.iter().filter(|t| texts.iter().any(|x| x.contains(&norm(t)))).count();
    hit as f64 / terms.len() as f64
}
