//! Polynomial-time path-dependent TreeSHAP.
//!
//! Each root-to-leaf walk keeps the set of unique features seen so far,
//! with the fraction of "zero" paths (feature unknown: follow cover) and
//! "one" paths (feature known: follow `x`) that flow through them, plus
//! permutation weights for every subset size. Extending the path by one
//! feature and unwinding a feature back out are both linear in its length.

use crate::models::RegressionTree;

#[derive(Clone, Copy, Debug)]
struct PathElement {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

fn extend(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: Option<usize>) {
    let l = path.len();
    path.push(PathElement {
        feature,
        zero,
        one,
        weight: if l == 0 { 1.0 } else { 0.0 },
    });
    let denom = (l + 1) as f64;
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / denom;
        path[i].weight = zero * path[i].weight * (l - i) as f64 / denom;
    }
}

fn unwind(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let PathElement { one, zero, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * denom / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (depth - i) as f64 / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

/// Total permutation weight of the path with element `index` removed,
/// without modifying it.
fn unwound_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElement { one, zero, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next * denom / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (depth - i) as f64 / denom;
        } else {
            total += path[i].weight / zero * denom / (depth - i) as f64;
        }
    }
    total
}

/// Adds `scale` times the SHAP values of `tree` at `x` into `phi`. Covers
/// must be positive at every node.
pub(crate) fn accumulate(tree: &RegressionTree, x: &[f64], scale: f64, phi: &mut [f64]) {
    let mut path = Vec::with_capacity(tree.depth() + 2);
    recurse(tree, x, scale, phi, 0, &mut path, 1.0, 1.0, None);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &RegressionTree,
    x: &[f64],
    scale: f64,
    phi: &mut [f64],
    node: usize,
    path: &mut Vec<PathElement>,
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    let saved = path.clone();
    extend(path, zero, one, feature);
    let current = &tree.nodes[node];
    match current.split() {
        None => {
            for i in 1..path.len() {
                let w = unwound_sum(path, i);
                let el = path[i];
                if let Some(f) = el.feature {
                    phi[f] += scale * w * (el.one - el.zero) * current.value;
                }
            }
        }
        Some((f, t, l, r)) => {
            let (hot, cold) = if x[f] <= t { (l, r) } else { (r, l) };
            let cover = current.cover as f64;
            let (mut iz, mut io) = (1.0, 1.0);
            if let Some(k) = path.iter().skip(1).position(|e| e.feature == Some(f)).map(|k| k + 1) {
                iz = path[k].zero;
                io = path[k].one;
                unwind(path, k);
            }
            let before_children = path.clone();
            recurse(tree, x, scale, phi, hot, path, iz * tree.nodes[hot].cover as f64 / cover, io, Some(f));
            *path = before_children;
            recurse(tree, x, scale, phi, cold, path, iz * tree.nodes[cold].cover as f64 / cover, 0.0, Some(f));
        }
    }
    *path = saved;
}
