//! Adjacency-constrained agglomerative clustering with Ward's incremental
//! sum-of-squares criterion, and dendrogram cutting into contiguous blocks.
//!
//! Only genomically adjacent clusters may merge, so every cluster is a
//! contiguous SNP run and the candidate set is just the sequence of active
//! adjacent pairs. Costs for the two pairs created by a merge are maintained
//! with the Lance-Williams update
//!
//! `d(k, i+j) = [(n_i+n_k) d(k,i) + (n_j+n_k) d(k,j) - n_k d(i,j)] / (n_i+n_j+n_k)`
//!
//! whose distance-2 input `d(k,j)` comes from a banded prefix-sum closed
//! form over the leaf dissimilarities (beyond-band pairs count as d = 1).
//! With a non-Euclidean input like 1 - r^2 the raw Ward cost can be
//! negative and heights can be non-monotone; merges are ordered by the raw
//! cost, recorded heights are clamped at zero, and cuts are defined purely
//! by merge count, never by height threshold.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::ld::LdDissimilarity;

/// One agglomeration step. Cluster ids follow the usual stepwise-dendrogram
/// convention: leaves are `0..P`, the cluster created by merge `k` is `P+k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left_id: usize,
    pub right_id: usize,
    /// Ward cost of the merge, clamped at zero.
    pub height: f64,
    /// Leaf count of the merged cluster.
    pub size: usize,
    /// Leaf index where the two spans meet (first leaf of the right span).
    pub junction: usize,
}

/// Sequence of adjacency-constrained Ward merges. With chromosome barriers
/// the structure is a forest: `merges.len() == p - n_trees`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    p: usize,
    n_trees: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// TSV dump: `step left right height size`, one header line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step\tleft\tright\theight\tsize")?;
        for (k, m) in self.merges.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                k, m.left_id, m.right_id, m.height, m.size
            )?;
        }
        Ok(())
    }
}

/// Labels of a dendrogram cut: exactly `g` contiguous clusters, indices
/// increasing with genomic position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    g: usize,
}

impl ClusterAssignment {
    /// Build from explicit labels, which must start at 0, be non-decreasing,
    /// and step by at most 1 (contiguous clusters in genomic order).
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("no labels".into()));
        }
        if labels[0] != 0 {
            return Err(Error::InvalidInput("labels must start at 0".into()));
        }
        for (i, w) in labels.windows(2).enumerate() {
            if w[1] != w[0] && w[1] != w[0] + 1 {
                return Err(Error::InvalidInput(format!(
                    "labels must be contiguous and ordered; jump at index {}",
                    i + 1
                )));
            }
        }
        let g = labels.last().unwrap() + 1;
        Ok(ClusterAssignment { labels, g })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    /// Per-cluster (first, last) leaf index spans, in cluster order.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let mut spans: Vec<(usize, usize)> = Vec::with_capacity(self.g);
        for (i, &lab) in self.labels.iter().enumerate() {
            if lab == spans.len() {
                spans.push((i, i));
            } else {
                spans[lab].1 = i;
            }
        }
        spans
    }
}

/// Banded prefix sums of the similarity s = 1 - d along each diagonal,
/// giving O(bandwidth) rectangle sums over leaf pairs. Singleton clusters
/// have within-sum 1 (the diagonal), which merges accumulate incrementally.
struct DiagPrefix {
    h: usize,
    /// `cum[delta-1][a]` = sum of s(a', a'+delta) for a' <= a.
    cum: Vec<Vec<f64>>,
}

impl DiagPrefix {
    fn new(d: &LdDissimilarity) -> Self {
        let p = d.p();
        let h = d.bandwidth().min(p.saturating_sub(1)).max(1);
        let mut cum = Vec::with_capacity(h);
        for delta in 1..=h {
            let len = p.saturating_sub(delta);
            let mut acc = Vec::with_capacity(len);
            let mut run = 0.0;
            for a in 0..len {
                run += 1.0 - d.get(a, a + delta);
                acc.push(run);
            }
            cum.push(acc);
        }
        DiagPrefix { h, cum }
    }

    /// Sum of s over one diagonal restricted to a in [a0, a1].
    fn diag_range(&self, delta: usize, a0: usize, a1: usize) -> f64 {
        debug_assert!(delta >= 1 && delta <= self.h);
        let row = &self.cum[delta - 1];
        if row.is_empty() || a0 > a1 || a0 >= row.len() {
            return 0.0;
        }
        let hi = row[a1.min(row.len() - 1)];
        let lo = if a0 == 0 { 0.0 } else { row[a0 - 1] };
        hi - lo
    }

    /// Sum of s(a,b) over a in A, b in B for disjoint spans with A left of B.
    fn cross_sum(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        debug_assert!(a.1 < b.0);
        let mut total = 0.0;
        let dmin = b.0 - a.1;
        let dmax = (b.1 - a.0).min(self.h);
        for delta in dmin..=dmax {
            let lo = a.0.max(b.0.saturating_sub(delta));
            let hi = a.1.min(b.1 - delta);
            if lo <= hi {
                total += self.diag_range(delta, lo, hi);
            }
        }
        total
    }

}

/// Closed-form Ward cost between contiguous clusters from similarity sums;
/// scaled so two singletons cost exactly their leaf dissimilarity.
fn ward_cost_from_sums(na: usize, nb: usize, s_aa: f64, s_bb: f64, s_ab: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    2.0 * na * nb / (na + nb)
        * (s_aa / (2.0 * na * na) + s_bb / (2.0 * nb * nb) - s_ab / (na * nb))
}

#[derive(Clone, Copy)]
struct Candidate {
    cost: f64,
    left_first: usize,
    slot: usize,
    stamp: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-ordering via Reverse at the call site; ties broken by the
        // left cluster's leftmost leaf index.
        self.cost
            .total_cmp(&other.cost)
            .then(self.left_first.cmp(&other.left_first))
    }
}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Node {
    first: usize,
    last: usize,
    size: usize,
    id: usize,
    left: Option<usize>,
    right: Option<usize>,
    /// Cached ordered double sum of similarities within the cluster.
    within: f64,
    /// Ward cost to the right neighbor (raw, may be negative).
    cost_right: f64,
    eligible_right: bool,
    stamp: u64,
    alive: bool,
}

/// Greedy adjacency-constrained Ward agglomeration. `barriers` lists
/// chromosome boundary leaf indices (each in `[1, P)`, strictly increasing);
/// pairs separated by a barrier are never merge candidates, so the result
/// is a forest with one tree per chromosome.
pub fn build(d: &LdDissimilarity, barriers: &[usize]) -> Result<Dendrogram> {
    let p = d.p();
    if p == 0 {
        return Err(Error::Empty("cannot cluster zero SNPs".into()));
    }
    for (k, &b) in barriers.iter().enumerate() {
        let ok = b >= 1 && b < p && (k == 0 || barriers[k - 1] < b);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "malformed barriers: entry {} = {} (must be strictly increasing, in [1, {}))",
                k, b, p
            )));
        }
    }
    let n_trees = barriers.len() + 1;
    if p == 1 {
        return Ok(Dendrogram {
            p,
            n_trees,
            merges: Vec::new(),
        });
    }

    let prefix = DiagPrefix::new(d);
    let is_barrier = {
        let mut v = vec![false; p + 1];
        for &b in barriers {
            v[b] = true;
        }
        v
    };

    let mut nodes: Vec<Node> = (0..p)
        .map(|j| Node {
            first: j,
            last: j,
            size: 1,
            id: j,
            left: (j > 0).then(|| j - 1),
            right: (j + 1 < p).then(|| j + 1),
            within: 1.0,
            cost_right: 0.0,
            eligible_right: false,
            stamp: 0,
            alive: true,
        })
        .collect();

    let mut heap: BinaryHeap<std::cmp::Reverse<Candidate>> = BinaryHeap::new();
    for j in 0..p - 1 {
        if !is_barrier[j + 1] {
            nodes[j].cost_right = d.get(j, j + 1);
            nodes[j].eligible_right = true;
            heap.push(std::cmp::Reverse(Candidate {
                cost: nodes[j].cost_right,
                left_first: j,
                slot: j,
                stamp: 0,
            }));
        }
    }

    let total_merges = p - n_trees;
    let mut merges = Vec::with_capacity(total_merges);
    while merges.len() < total_merges {
        let cand = match heap.pop() {
            Some(std::cmp::Reverse(c)) => c,
            None => {
                return Err(Error::InvalidInput(
                    "candidate heap exhausted before clustering completed".into(),
                ))
            }
        };
        let l = cand.slot;
        if !nodes[l].alive || nodes[l].stamp != cand.stamp || !nodes[l].eligible_right {
            continue;
        }
        let r = match nodes[l].right {
            Some(r) if nodes[r].alive => r,
            _ => continue,
        };

        let merge_cost = nodes[l].cost_right;
        let (l_span, r_span) = ((nodes[l].first, nodes[l].last), (nodes[r].first, nodes[r].last));
        let (nl, nr) = (nodes[l].size, nodes[r].size);
        let new_id = p + merges.len();
        merges.push(Merge {
            left_id: nodes[l].id,
            right_id: nodes[r].id,
            height: merge_cost.max(0.0),
            size: nl + nr,
            junction: r_span.0,
        });

        // Costs to the flanking neighbors via Lance-Williams; the
        // distance-2 terms d(K, R) and d(L, M) come from the closed form.
        let left_neighbor = nodes[l].left;
        let right_neighbor = nodes[r].right;

        let new_slot = nodes.len();
        let within_new = nodes[l].within
            + nodes[r].within
            + 2.0 * prefix.cross_sum(l_span, r_span);
        nodes[l].alive = false;
        nodes[r].alive = false;
        nodes.push(Node {
            first: l_span.0,
            last: r_span.1,
            size: nl + nr,
            id: new_id,
            left: left_neighbor,
            right: right_neighbor,
            within: within_new,
            cost_right: 0.0,
            eligible_right: false,
            stamp: 0,
            alive: true,
        });

        if let Some(k) = left_neighbor {
            nodes[k].right = Some(new_slot);
            if nodes[k].eligible_right {
                let d_kl = nodes[k].cost_right;
                let k_span = (nodes[k].first, nodes[k].last);
                let nk = nodes[k].size;
                let s_kr = prefix.cross_sum(k_span, r_span);
                let d_kr = ward_cost_from_sums(nk, nr, nodes[k].within, nodes[r].within, s_kr);
                let denom = (nl + nr + nk) as f64;
                let cost = ((nl + nk) as f64 * d_kl + (nr + nk) as f64 * d_kr
                    - nk as f64 * merge_cost)
                    / denom;
                nodes[k].stamp += 1;
                nodes[k].cost_right = cost;
                heap.push(std::cmp::Reverse(Candidate {
                    cost,
                    left_first: nodes[k].first,
                    slot: k,
                    stamp: nodes[k].stamp,
                }));
            }
        }

        if let Some(m) = right_neighbor {
            nodes[m].left = Some(new_slot);
            // Eligibility of (merged, M) equals eligibility of (R, M).
            if nodes_eligible_pair(&is_barrier, nodes[new_slot].last, nodes[m].first) {
                let d_rm = nodes[r].cost_right;
                let m_span = (nodes[m].first, nodes[m].last);
                let nm = nodes[m].size;
                let s_lm = prefix.cross_sum(l_span, m_span);
                let d_lm = ward_cost_from_sums(nl, nm, nodes[l].within, nodes[m].within, s_lm);
                let denom = (nl + nr + nm) as f64;
                let cost = ((nl + nm) as f64 * d_lm + (nr + nm) as f64 * d_rm
                    - nm as f64 * merge_cost)
                    / denom;
                nodes[new_slot].stamp = 0;
                nodes[new_slot].cost_right = cost;
                nodes[new_slot].eligible_right = true;
                heap.push(std::cmp::Reverse(Candidate {
                    cost,
                    left_first: nodes[new_slot].first,
                    slot: new_slot,
                    stamp: 0,
                }));
            }
        }
    }

    Ok(Dendrogram {
        p,
        n_trees,
        merges,
    })
}

fn nodes_eligible_pair(is_barrier: &[bool], left_last: usize, right_first: usize) -> bool {
    debug_assert_eq!(left_last + 1, right_first);
    !is_barrier[right_first]
}

/// Undo the most recent merges until exactly `g` clusters remain;
/// equivalently, apply the first `P - g` merges to the singleton partition.
pub fn cut(t: &Dendrogram, g: usize) -> Result<ClusterAssignment> {
    let p = t.p();
    if g < t.n_trees() || g > p {
        return Err(Error::InvalidInput(format!(
            "cut level {} out of range [{}, {}]",
            g,
            t.n_trees(),
            p
        )));
    }
    let mut boundary = vec![true; p]; // boundary[b] separates leaves b-1 | b
    for m in &t.merges[..p - g] {
        boundary[m.junction] = false;
    }
    let mut labels = Vec::with_capacity(p);
    let mut lab = 0usize;
    for (i, _) in boundary.iter().enumerate() {
        if i > 0 && boundary[i] {
            lab += 1;
        }
        labels.push(lab);
    }
    debug_assert_eq!(lab + 1, g);
    Ok(ClusterAssignment { labels, g })
}
