//! Tree samplers: plain Galton-Watson (optionally ball-truncated), exact
//! size-conditioned sampling via the cycle lemma, and Kesten spine trees.

use super::tree::{PlanarTree, SpineTree};
use super::{OffspringDistribution, Tail};
use rand::Rng;
use thiserror::Error;

/// Critical GW trees are a.s. finite but have heavy size tails; the cap turns
/// a runaway draw into an explicit signal instead of an allocation storm.
pub const DEFAULT_NODE_CAP: usize = 100_000_000;

const MAX_ENUM_EDGES: usize = 13;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("node cap {0} exceeded; retry or raise the cap")]
    NodeCapExceeded(usize),
    #[error("sampler requires a critical offspring law")]
    NotCritical,
    #[error("conditioned degree sampling exhausted {0} attempts")]
    RejectionBudget(usize),
    #[error("edge count must be >= 1")]
    EmptySupport,
    #[error("enumeration capped at {max} edges (asked for {asked})")]
    EnumerationTooLarge { asked: usize, max: usize },
}

/// One tree from the critical GW measure, children generated depth-first
/// starting at the root's unique child.
pub fn sample_gw_tree<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    rng: &mut R,
    node_cap: usize,
) -> Result<PlanarTree, SampleError> {
    if !dist.is_critical() {
        return Err(SampleError::NotCritical);
    }
    let mut tree = PlanarTree::builder_with_root();
    let first = tree.add_child(0);
    let mut stack = vec![first];
    let mut scratch = Vec::new();
    while let Some(v) = stack.pop() {
        let c = dist.sample(rng);
        if tree.node_count() + c as usize > node_cap {
            return Err(SampleError::NodeCapExceeded(node_cap));
        }
        scratch.clear();
        for _ in 0..c {
            scratch.push(tree.add_child(v));
        }
        stack.extend(scratch.iter().rev());
    }
    Ok(tree)
}

/// The ball B_radius of a GW tree: growth stops at the given height, which
/// leaves level sizes and ball volumes up to `radius` exactly distributed.
pub fn sample_gw_ball<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    radius: usize,
    rng: &mut R,
) -> Result<PlanarTree, SampleError> {
    if !dist.is_critical() {
        return Err(SampleError::NotCritical);
    }
    let mut tree = PlanarTree::builder_with_root();
    let mut frontier = vec![tree.add_child(0)];
    for _height in 1..radius {
        let mut next = Vec::new();
        for v in frontier {
            for _ in 0..dist.sample(rng) {
                next.push(tree.add_child(v));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(tree)
}

/// Exact sampler for the size-conditioned measure on trees with `n_edges`
/// edges.
///
/// Degree sequences conditioned on their sum are exchangeable, so the unique
/// cyclic rotation with a nonnegative Lukasiewicz path is distributed as the
/// conditioned tree. For a pure geometric law the conditioned sequence is a
/// uniform composition, sampled directly; otherwise sequences are drawn
/// i.i.d. and rejected on the sum (acceptance ~ N^{-1/2}).
pub fn sample_gw_tree_conditioned<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    n_edges: usize,
    rng: &mut R,
) -> Result<PlanarTree, SampleError> {
    if n_edges == 0 {
        return Err(SampleError::EmptySupport);
    }
    if n_edges == 1 {
        return Ok(PlanarTree::single_edge());
    }
    let counts = if is_pure_geometric(dist) {
        uniform_composition_counts(n_edges, rng)
    } else {
        conditioned_counts_rejection(dist, n_edges, rng)?
    };
    let rotated = cycle_lemma_rotation(&counts);
    Ok(PlanarTree::from_child_counts(&rotated).expect("cycle lemma yields a valid sequence"))
}

/// Debug oracle: repeatedly sample the unconditioned measure until the tree
/// has exactly `n_edges` edges. Exponentially slow in N; tests only.
pub fn sample_gw_tree_conditioned_rejection<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    n_edges: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<PlanarTree, SampleError> {
    for _ in 0..max_attempts {
        if let Ok(t) = sample_gw_tree(dist, rng, 4 * n_edges + 64) {
            if t.edge_count() == n_edges {
                return Ok(t);
            }
        }
    }
    Err(SampleError::RejectionBudget(max_attempts))
}

/// True when p_n = coeff * ratio^n for every n, in which case the conditioned
/// law is uniform over degree sequences and admits direct sampling.
fn is_pure_geometric(dist: &OffspringDistribution) -> bool {
    match dist.tail() {
        Tail::Geometric { coeff, ratio } => dist
            .head()
            .iter()
            .enumerate()
            .all(|(n, &p)| (p - coeff * ratio.powi(n as i32)).abs() <= 1e-15 * p.max(coeff)),
        Tail::FiniteSupport => false,
    }
}

/// Child counts of a uniformly random N-edge tree: a uniform composition of
/// 2N-1 into N positive parts, shifted down by one.
fn uniform_composition_counts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u32> {
    let m = 2 * n - 1;
    // Choose n-1 distinct bar positions in 1..m by partial Fisher-Yates.
    let mut slots: Vec<u32> = (1..m as u32).collect();
    let k = n - 1;
    for i in 0..k {
        let j = rng.gen_range(i..slots.len());
        slots.swap(i, j);
    }
    let mut bars = slots[..k].to_vec();
    bars.sort_unstable();
    let mut counts = Vec::with_capacity(n);
    let mut prev = 0u32;
    for &b in &bars {
        counts.push(b - prev - 1);
        prev = b;
    }
    counts.push(m as u32 - prev - 1);
    counts
}

fn conditioned_counts_rejection<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<u32>, SampleError> {
    let target = (n - 1) as u64;
    let max_attempts = 1_000_000;
    let mut counts = Vec::with_capacity(n);
    'attempt: for _ in 0..max_attempts {
        counts.clear();
        let mut sum = 0u64;
        for _ in 0..n {
            let c = dist.sample(rng);
            sum += c;
            if sum > target {
                continue 'attempt;
            }
            counts.push(c as u32);
        }
        if sum == target {
            return Ok(counts);
        }
    }
    Err(SampleError::RejectionBudget(max_attempts))
}

/// The unique cyclic shift whose Lukasiewicz path stays nonnegative until the
/// final step (Dvoretzky-Motzkin cycle lemma).
fn cycle_lemma_rotation(counts: &[u32]) -> Vec<u32> {
    let n = counts.len();
    let mut prefix = 0i64;
    let mut min = i64::MAX;
    let mut arg = 0usize;
    for (j, &c) in counts.iter().enumerate() {
        prefix += i64::from(c) - 1;
        if prefix < min {
            min = prefix;
            arg = j + 1;
        }
    }
    debug_assert_eq!(prefix, -1);
    let start = arg % n;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&counts[start..]);
    out.extend_from_slice(&counts[..start]);
    out
}

/// A height-capped window of the single-spine (Kesten) tree.
///
/// Each spine vertex draws its total offspring from the size-biased law
/// m p_m, the spine continues through a uniformly chosen child slot, and the
/// remaining slots carry independent GW branches, grown only down to the cap.
pub fn sample_kesten_tree<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    height_cap: usize,
    rng: &mut R,
) -> Result<SpineTree, SampleError> {
    if !dist.is_critical() {
        return Err(SampleError::NotCritical);
    }
    assert!(height_cap >= 1, "height_cap must be >= 1");
    let mut tree = PlanarTree::builder_with_root();
    let mut spine = vec![0];
    let mut sv = tree.add_child(0);
    spine.push(sv);
    for height in 1..height_cap {
        let m = dist.sample_size_biased(rng);
        let slot = rng.gen_range(0..m);
        let mut next = sv;
        for j in 0..m {
            let child = tree.add_child(sv);
            if j == slot {
                next = child;
            } else {
                grow_subtree(&mut tree, child, height_cap - height - 1, dist, rng);
            }
        }
        spine.push(next);
        sv = next;
    }
    Ok(SpineTree { tree, spine, height_cap })
}

/// Grow a GW subtree below `root`, at most `depth_left` further generations.
fn grow_subtree<R: Rng + ?Sized>(
    tree: &mut PlanarTree,
    root: u32,
    depth_left: usize,
    dist: &OffspringDistribution,
    rng: &mut R,
) {
    if depth_left == 0 {
        return;
    }
    let mut stack = vec![(root, depth_left)];
    while let Some((v, left)) = stack.pop() {
        for _ in 0..dist.sample(rng) {
            let child = tree.add_child(v);
            if left > 1 {
                stack.push((child, left - 1));
            }
        }
    }
}

/// All trees with `n_edges` edges and a degree-one root; there are
/// Catalan(n_edges - 1) of them.
pub fn enumerate_trees(n_edges: usize) -> Result<Vec<PlanarTree>, SampleError> {
    if n_edges == 0 {
        return Err(SampleError::EmptySupport);
    }
    if n_edges > MAX_ENUM_EDGES {
        return Err(SampleError::EnumerationTooLarge { asked: n_edges, max: MAX_ENUM_EDGES });
    }
    let mut out = Vec::new();
    let mut counts = Vec::with_capacity(n_edges);
    enumerate_rec(n_edges, 1, &mut counts, &mut out);
    Ok(out)
}

fn enumerate_rec(n: usize, pending: usize, counts: &mut Vec<u32>, out: &mut Vec<PlanarTree>) {
    let placed = counts.len();
    if placed == n {
        if pending == 0 {
            out.push(PlanarTree::from_child_counts(counts).expect("valid by construction"));
        }
        return;
    }
    let remaining = n - placed;
    // pending slots after this vertex must stay in [1, remaining - 1] range
    // (0 allowed only on the last vertex).
    for c in 0..remaining {
        let next_pending = pending - 1 + c;
        if next_pending == 0 && placed + 1 < n {
            continue;
        }
        if next_pending > remaining - 1 {
            break;
        }
        counts.push(c as u32);
        enumerate_rec(n, next_pending, counts, out);
        counts.pop();
    }
}
