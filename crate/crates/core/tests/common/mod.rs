//! Reference implementations used as oracles. Nothing here calls into the
//! library's numerical code: determinants use Gaussian elimination with
//! partial pivoting, tree counts use subset enumeration, and optima use plain
//! combination enumeration.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeconn::instance::{Channel, EspInstance};

pub type EdgeList = Vec<(usize, usize, f64)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    d
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Laplacian with the last vertex's row and column deleted. 1-based edges.
pub fn grounded_laplacian(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        let (u, v) = (u - 1, v - 1);
        l[u][u] += w;
        l[v][v] += w;
        l[u][v] -= w;
        l[v][u] -= w;
    }
    l.truncate(n - 1);
    for row in &mut l {
        row.truncate(n - 1);
    }
    l
}

/// Weighted spanning-tree count as a determinant.
pub fn tree_count_det(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    if n == 1 {
        return 1.0;
    }
    det(grounded_laplacian(n, edges))
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    r
}

/// Weighted spanning-tree count by enumerating `(n−1)`-subsets of the edge
/// list (parallel edges count separately).
pub fn tree_count_enum(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let m = edges.len();
    if n == 1 {
        return 1.0;
    }
    let mut total = 0.0;
    for subset in combinations(m, n - 1) {
        let mut p: Vec<usize> = (0..n).collect();
        let mut prod = 1.0;
        let mut tree = true;
        for &i in &subset {
            let (u, v, w) = edges[i];
            let (a, b) = (find(&mut p, u - 1), find(&mut p, v - 1));
            if a == b {
                tree = false;
                break;
            }
            p[a] = b;
            prod *= w;
        }
        if tree {
            total += prod;
        }
    }
    total
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Effective resistance between 1-based `u` and `v` by a dense solve.
pub fn resistance(n: usize, edges: &[(usize, usize, f64)], u: usize, v: usize) -> f64 {
    let mut b = vec![0.0; n - 1];
    let mut put = |i: usize, s: f64| {
        if i < n {
            b[i - 1] += s;
        }
    };
    put(u, 1.0);
    put(v, -1.0);
    let a = b.clone();
    let x = solve(grounded_laplacian(n, edges), b);
    a.iter().zip(&x).map(|(p, q)| p * q).sum()
}

/// Connected random multigraph: a random spanning tree plus `extra` random
/// edges, integer weights in `lo..=hi`.
pub fn random_connected(r: &mut ChaCha8Rng, n: usize, extra: usize, lo: u32, hi: u32) -> EdgeList {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(r);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[r.gen_range(0..i)];
        edges.push((order[i], parent, f64::from(r.gen_range(lo..=hi))));
    }
    for _ in 0..extra {
        let u = r.gen_range(1..=n);
        let mut v = r.gen_range(1..=n);
        while v == u {
            v = r.gen_range(1..=n);
        }
        edges.push((u, v, f64::from(r.gen_range(lo..=hi))));
    }
    edges
}

/// Edges of an instance's base plus the chosen candidates under one channel.
pub fn instance_edges(inst: &EspInstance, channel: Channel, chosen: &[usize]) -> EdgeList {
    inst.base_edges()
        .iter()
        .chain(chosen.iter().map(|&i| &inst.candidates()[i]))
        .map(|e| {
            let (u, v) = e.endpoints();
            (u, v, e.channel_weight(channel))
        })
        .collect()
}

/// Combined objective of base plus `chosen`, from dense determinants.
pub fn objective(inst: &EspInstance, chosen: &[usize]) -> f64 {
    inst.objective()
        .channels()
        .iter()
        .map(|&(ch, coef)| coef * tree_count_det(inst.vertex_count(), &instance_edges(inst, ch, chosen)).ln())
        .sum()
}

/// Exact optimum over `k`-subsets of the candidates.
pub fn optimum(inst: &EspInstance) -> (f64, Vec<usize>) {
    combinations(inst.candidate_count(), inst.k())
        .into_iter()
        .map(|s| (objective(inst, &s), s))
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cur| if cur.0 > best.0 { cur } else { best })
}

/// Uniformly random subset of `0..c` with each element kept with
/// probability 1/2.
pub fn random_subset(r: &mut ChaCha8Rng, c: usize) -> Vec<usize> {
    (0..c).filter(|_| r.gen_bool(0.5)).collect()
}

/// Random addition instance built without the library generator: a random
/// connected base and `c` random candidate pairs, integer weights in 1..=5.
pub fn random_esp(r: &mut ChaCha8Rng, n: usize, extra: usize, c: usize, k: usize, two_channel: bool) -> EspInstance {
    use treeconn::instance::{Direction, EdgeRecord, Objective};
    let record = |r: &mut ChaCha8Rng, u: usize, v: usize, w: f64| {
        if two_channel {
            EdgeRecord::double(u, v, w, f64::from(r.gen_range(1..=5u32)))
        } else {
            EdgeRecord::single(u, v, w)
        }
    };
    let base: Vec<_> =
        random_connected(r, n, extra, 1, 5).into_iter().map(|(u, v, w)| record(r, u, v, w)).collect();
    let candidates: Vec<_> = (0..c)
        .map(|_| {
            let u = r.gen_range(1..=n);
            let mut v = r.gen_range(1..=n);
            while v == u {
                v = r.gen_range(1..=n);
            }
            let w = f64::from(r.gen_range(1..=5u32));
            record(r, u, v, w)
        })
        .collect();
    let objective = if two_channel { Objective::SlamDouble } else { Objective::Single };
    EspInstance::new(n, base, candidates, k, Direction::Add, objective).unwrap()
}
