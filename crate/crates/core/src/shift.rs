//! Finite topological Markov shifts: transition graphs, words, necklaces,
//! transitivity, spectral decomposition, and loop enumeration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symbol of the shift alphabet, indexed `0..alphabet_size`.
pub type Symbol = usize;

/// A finite symbol sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    /// Rotation by `k`: `rotate(w, k)[i] = w[(i + k) mod n]`.
    pub fn rotate(&self, k: usize) -> Word {
        let n = self.0.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    /// True if no nontrivial rotation fixes the word.
    pub fn is_primitive(&self) -> bool {
        let n = self.0.len();
        (1..n).all(|k| self.rotate(k) != *self)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", self.0)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

/// Canonical representative of a cyclic word: the lexicographically least
/// rotation. Two words map to equal necklaces iff they are rotations of each
/// other.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Necklace {
    canonical: Word,
}

impl Necklace {
    pub fn canonical(&self) -> &Word {
        &self.canonical
    }

    pub fn period_length(&self) -> usize {
        self.canonical.len()
    }

    /// Symbol of the bi-infinite periodic extension at position `i`.
    pub fn symbol_at(&self, i: i64) -> Symbol {
        let n = self.canonical.len() as i64;
        let idx = i.rem_euclid(n) as usize;
        self.canonical.0[idx]
    }
}

impl fmt::Debug for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Necklace{:?}", self.canonical.0)
    }
}

/// Least-rotation index by Booth's algorithm, linear time.
fn least_rotation_index(w: &[Symbol]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    // Doubled-string failure function variant of Booth's algorithm.
    let mut f = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = w[j % n];
        let mut i = f[j - k - 1];
        while i != usize::MAX && sj != w[(k + i + 1) % n] {
            if sj < w[(k + i + 1) % n] {
                k = j - i - 1;
            }
            i = f[i];
        }
        if i == usize::MAX && sj != w[k % n] {
            if sj < w[k % n] {
                k = j;
            }
            f[j - k] = usize::MAX;
        } else {
            f[j - k] = i.wrapping_add(1);
        }
    }
    k
}

/// The least rotation of `w` as a necklace.
pub fn canonical_necklace(w: &Word) -> Necklace {
    assert!(!w.is_empty(), "canonical_necklace of empty word");
    let k = least_rotation_index(&w.0);
    Necklace {
        canonical: w.rotate(k),
    }
}

/// Euler's totient.
fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Number of cyclic words of length `n` over `alphabet_size` symbols:
/// `(1/n) * sum over d | n of phi(d) * L^(n/d)`.
pub fn count_necklaces(alphabet_size: usize, length: usize) -> Result<u64> {
    if alphabet_size == 0 || length == 0 {
        return Err(Error::InvalidInput(
            "alphabet_size and length must be >= 1".into(),
        ));
    }
    let l = alphabet_size as u128;
    let n = length as u64;
    let mut total: u128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            let mut pw: u128 = 1;
            for _ in 0..(n / d) {
                pw = pw.checked_mul(l).ok_or(Error::Overflow("count_necklaces"))?;
            }
            let term = (totient(d) as u128)
                .checked_mul(pw)
                .ok_or(Error::Overflow("count_necklaces"))?;
            total = total
                .checked_add(term)
                .ok_or(Error::Overflow("count_necklaces"))?;
        }
    }
    let count = total / n as u128;
    u64::try_from(count).map_err(|_| Error::Overflow("count_necklaces"))
}

/// Finite directed graph defining a topological Markov shift.
///
/// Every symbol must have at least one outgoing and one incoming edge, so
/// bi-infinite admissible paths exist through every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    alphabet_size: usize,
    out_edges: Vec<BTreeSet<Symbol>>,
    in_edges: Vec<BTreeSet<Symbol>>,
}

/// JSON schema: `{"alphabet_size": int, "edges": [[a,b],...]}`.
#[derive(Serialize, Deserialize)]
pub struct GraphSpec {
    pub alphabet_size: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TransitionGraph {
    pub fn new(alphabet_size: usize, edges: &[(Symbol, Symbol)]) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidGraph("alphabet_size must be >= 1".into()));
        }
        let mut out_edges = vec![BTreeSet::new(); alphabet_size];
        let mut in_edges = vec![BTreeSet::new(); alphabet_size];
        for &(a, b) in edges {
            if a >= alphabet_size || b >= alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: a.max(b),
                    alphabet_size,
                });
            }
            out_edges[a].insert(b);
            in_edges[b].insert(a);
        }
        for v in 0..alphabet_size {
            if out_edges[v].is_empty() || in_edges[v].is_empty() {
                return Err(Error::InvalidGraph(format!(
                    "symbol {v} lacks an outgoing or incoming edge"
                )));
            }
        }
        Ok(TransitionGraph {
            alphabet_size,
            out_edges,
            in_edges,
        })
    }

    /// Complete graph on `alphabet_size` symbols (the full shift).
    pub fn full_shift(alphabet_size: usize) -> Self {
        let all: BTreeSet<Symbol> = (0..alphabet_size).collect();
        TransitionGraph {
            alphabet_size,
            out_edges: vec![all.clone(); alphabet_size],
            in_edges: vec![all; alphabet_size],
        }
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        TransitionGraph::new(n, &edges).expect("cycle graph is always valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn has_edge(&self, a: Symbol, b: Symbol) -> bool {
        a < self.alphabet_size && self.out_edges[a].contains(&b)
    }

    pub fn successors(&self, a: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        self.out_edges[a].iter().copied()
    }

    pub fn edges(&self) -> Vec<(Symbol, Symbol)> {
        let mut v = Vec::new();
        for a in 0..self.alphabet_size {
            for &b in &self.out_edges[a] {
                v.push((a, b));
            }
        }
        v
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            alphabet_size: self.alphabet_size,
            edges: self.edges(),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        TransitionGraph::new(spec.alphabet_size, &spec.edges)
    }

    /// True iff every symbol of the word is in range and all consecutive
    /// pairs are edges (not requiring the wrap-around edge).
    pub fn is_admissible_path(&self, w: &Word) -> bool {
        w.symbols().iter().all(|&s| s < self.alphabet_size)
            && w.symbols().windows(2).all(|p| self.has_edge(p[0], p[1]))
    }

    /// True iff `w` is an admissible path and the last-to-first edge exists.
    pub fn is_admissible_loop(&self, w: &Word) -> bool {
        !w.is_empty()
            && self.is_admissible_path(w)
            && self.has_edge(w.0[w.len() - 1], w.0[0])
    }

    fn reachable(&self, start: Symbol, backwards: bool) -> Vec<bool> {
        let mut seen = vec![false; self.alphabet_size];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            let nexts = if backwards {
                &self.in_edges[v]
            } else {
                &self.out_edges[v]
            };
            for &w in nexts {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// True iff the graph is strongly connected (a path between any ordered pair
/// of symbols).
pub fn is_transitive(g: &TransitionGraph) -> bool {
    let fwd = g.reachable(0, false);
    let bwd = g.reachable(0, true);
    fwd.into_iter().zip(bwd).all(|(a, b)| a && b)
}

/// Cyclic class structure of a transitive graph: the period `p` (gcd of all
/// cycle lengths) and the partition of the alphabet into `p` cyclically
/// permuted classes. `p = 1` iff the shift is topologically mixing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralDecomposition {
    pub period: usize,
    pub classes: Vec<Vec<Symbol>>,
}

pub fn spectral_decomposition(g: &TransitionGraph) -> Result<SpectralDecomposition> {
    if !is_transitive(g) {
        return Err(Error::NotTransitive);
    }
    // BFS levels from vertex 0; the period is the gcd of level[u]+1-level[v]
    // over all edges u -> v.
    let n = g.alphabet_size();
    let mut level = vec![i64::MIN; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for w in g.successors(v) {
            if level[w] == i64::MIN {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut p: i64 = 0;
    for (a, b) in g.edges() {
        let diff = level[a] + 1 - level[b];
        p = num_integer::gcd(p, diff.abs());
    }
    let p = if p == 0 { 1 } else { p as usize };
    let mut classes = vec![Vec::new(); p];
    for v in 0..n {
        classes[(level[v].rem_euclid(p as i64)) as usize].push(v);
    }
    Ok(SpectralDecomposition { period: p, classes })
}

/// All admissible loops of length `n` based at `base`, in lexicographic order
/// of their symbol sequences, each exactly once.
pub fn enumerate_loops(g: &TransitionGraph, base: Symbol, n: usize) -> Vec<Word> {
    assert!(n >= 1, "loop length must be >= 1");
    assert!(base < g.alphabet_size(), "base symbol out of range");
    let mut out = Vec::new();
    let mut path = vec![base];
    dfs_loops(g, base, n, &mut path, &mut out);
    out
}

fn dfs_loops(
    g: &TransitionGraph,
    base: Symbol,
    n: usize,
    path: &mut Vec<Symbol>,
    out: &mut Vec<Word>,
) {
    if path.len() == n {
        if g.has_edge(path[n - 1], base) {
            out.push(Word(path.clone()));
        }
        return;
    }
    let last = *path.last().unwrap();
    for next in g.successors(last) {
        path.push(next);
        dfs_loops(g, base, n, path, out);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &[usize]) -> Word {
        Word::new(s.to_vec())
    }

    #[test]
    fn transitive_full_shift() {
        assert!(is_transitive(&TransitionGraph::full_shift(2)));
    }

    #[test]
    fn not_transitive_disjoint_self_loops() {
        let g = TransitionGraph::new(2, &[(0, 0), (1, 1)]).unwrap();
        assert!(!is_transitive(&g));
    }

    #[test]
    fn transitivity_matches_floyd_warshall_oracle() {
        // Random-ish 6-vertex graphs against transitive-closure reachability.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut tested = 0;
        while tested < 200 {
            let n = 6;
            let mut edges = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if next() % 4 == 0 {
                        edges.push((a, b));
                    }
                }
            }
            let Ok(g) = TransitionGraph::new(n, &edges) else {
                continue;
            };
            tested += 1;
            // Floyd-Warshall closure.
            let mut reach = vec![[false; 6]; 6];
            for &(a, b) in &edges {
                reach[a][b] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if reach[i][k] && reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
            let oracle = (0..n).all(|i| (0..n).all(|j| i == j || reach[i][j]));
            assert_eq!(is_transitive(&g), oracle);
        }
    }

    #[test]
    fn spectral_three_cycle() {
        let sd = spectral_decomposition(&TransitionGraph::cycle(3)).unwrap();
        assert_eq!(sd.period, 3);
        assert_eq!(sd.classes.iter().filter(|c| c.len() == 1).count(), 3);
    }

    #[test]
    fn spectral_full_shift_mixing() {
        let sd = spectral_decomposition(&TransitionGraph::full_shift(2)).unwrap();
        assert_eq!(sd.period, 1);
        assert_eq!(sd.classes.len(), 1);
    }

    #[test]
    fn spectral_bipartite_with_parity_chords() {
        // 4 vertices, parity classes {0,2} and {1,3}; all parity-respecting
        // edges present. gcd of enumerated cycle lengths is 2.
        let edges = [
            (0, 1),
            (0, 3),
            (2, 1),
            (2, 3),
            (1, 0),
            (1, 2),
            (3, 0),
            (3, 2),
        ];
        let g = TransitionGraph::new(4, &edges).unwrap();
        let sd = spectral_decomposition(&g).unwrap();
        assert_eq!(sd.period, 2);
        // Oracle: gcd of lengths of all loops based at 0 up to length 8.
        let mut gcd = 0usize;
        for n in 1..=8 {
            if !enumerate_loops(&g, 0, n).is_empty() {
                gcd = num_integer::gcd(gcd, n);
            }
        }
        assert_eq!(gcd, 2);
        // Every edge respects the cyclic block structure.
        let mut class_of = vec![0; 4];
        for (i, c) in sd.classes.iter().enumerate() {
            for &v in c {
                class_of[v] = i;
            }
        }
        for (a, b) in g.edges() {
            assert_eq!((class_of[a] + 1) % sd.period, class_of[b]);
        }
    }

    #[test]
    fn spectral_block_recursion_is_mixing() {
        // Restricting to one block and taking p-step edges yields p = 1.
        let g = TransitionGraph::cycle(4);
        let sd = spectral_decomposition(&g).unwrap();
        assert_eq!(sd.period, 4);
        let block = &sd.classes[0];
        // p-step edges within the block.
        let index: std::collections::HashMap<usize, usize> =
            block.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for &v in block {
            // walk p steps
            let mut frontier = vec![v];
            for _ in 0..sd.period {
                let mut nf = Vec::new();
                for f in frontier {
                    nf.extend(g.successors(f));
                }
                frontier = nf;
            }
            for t in frontier {
                if let Some(&ti) = index.get(&t) {
                    edges.push((index[&v], ti));
                }
            }
        }
        let bg = TransitionGraph::new(block.len(), &edges).unwrap();
        assert_eq!(spectral_decomposition(&bg).unwrap().period, 1);
    }

    #[test]
    fn loops_full_2_shift() {
        let g = TransitionGraph::full_shift(2);
        assert_eq!(enumerate_loops(&g, 0, 4).len(), 8);
        for n in 1..=12 {
            assert_eq!(enumerate_loops(&g, 0, n).len(), 1usize << (n - 1));
        }
        let g4 = TransitionGraph::full_shift(4);
        for n in 1..=6 {
            assert_eq!(enumerate_loops(&g4, 0, n).len(), 4usize.pow(n as u32 - 1));
        }
    }

    #[test]
    fn loops_three_cycle() {
        let g = TransitionGraph::cycle(3);
        let loops = enumerate_loops(&g, 0, 3);
        assert_eq!(loops, vec![w(&[0, 1, 2])]);
    }

    #[test]
    fn loops_no_self_loop() {
        let g = TransitionGraph::cycle(2);
        assert!(enumerate_loops(&g, 0, 1).is_empty());
    }

    #[test]
    fn loops_are_lexicographic_and_admissible() {
        let g = TransitionGraph::full_shift(3);
        let loops = enumerate_loops(&g, 1, 3);
        let mut sorted = loops.clone();
        sorted.sort();
        assert_eq!(loops, sorted);
        assert!(loops.iter().all(|l| g.is_admissible_loop(l)));
    }

    #[test]
    fn necklace_examples() {
        // BAAB -> AABB (B=1, A=0)
        assert_eq!(
            canonical_necklace(&w(&[1, 0, 0, 1])).canonical(),
            &w(&[0, 0, 1, 1])
        );
        assert_eq!(canonical_necklace(&w(&[0, 0, 0])).canonical(), &w(&[0, 0, 0]));
    }

    #[test]
    fn necklace_matches_brute_force_rotations() {
        let mut state = 0xdeadbeefu64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let n = 1 + (next() % 9) as usize;
            let word = Word::new((0..n).map(|_| (next() % 3) as usize).collect());
            let brute = (0..n).map(|k| word.rotate(k)).min().unwrap();
            assert_eq!(canonical_necklace(&word).canonical(), &brute);
        }
    }

    #[test]
    fn necklace_rotation_invariance_exhaustive() {
        // canonical_necklace(rotate(w,k)) == canonical_necklace(w), all words
        // up to n = 10 over 3 symbols would be 59049 * rotations; sample the
        // full space for L=2 up to n=10 and L=3 up to n=7.
        for (alpha, max_n) in [(2usize, 10usize), (3, 7)] {
            for n in 1..=max_n {
                let total = alpha.pow(n as u32);
                for code in 0..total {
                    let mut c = code;
                    let word = Word::new(
                        (0..n)
                            .map(|_| {
                                let s = c % alpha;
                                c /= alpha;
                                s
                            })
                            .collect(),
                    );
                    let canon = canonical_necklace(&word);
                    for k in 0..n {
                        assert_eq!(canonical_necklace(&word.rotate(k)), canon);
                    }
                }
            }
        }
    }

    #[test]
    fn count_necklaces_examples() {
        assert_eq!(count_necklaces(2, 3).unwrap(), 4);
        assert_eq!(count_necklaces(2, 1).unwrap(), 2);
        assert_eq!(count_necklaces(3, 4).unwrap(), 24);
    }

    #[test]
    fn count_necklaces_matches_brute_force() {
        for (alpha, max_n) in [(2usize, 10usize), (3, 7)] {
            for n in 1..=max_n {
                let total = alpha.pow(n as u32);
                let mut set = std::collections::HashSet::new();
                for code in 0..total {
                    let mut c = code;
                    let word = Word::new(
                        (0..n)
                            .map(|_| {
                                let s = c % alpha;
                                c /= alpha;
                                s
                            })
                            .collect(),
                    );
                    set.insert(canonical_necklace(&word));
                }
                assert_eq!(count_necklaces(alpha, n).unwrap(), set.len() as u64);
            }
        }
    }

    #[test]
    fn orbit_sizes_partition_words() {
        // Sum over necklaces of orbit size equals L^n.
        for n in 1..=10usize {
            let alpha = 2usize;
            let total = alpha.pow(n as u32);
            let mut orbit_size_sum = 0usize;
            let mut seen = std::collections::HashSet::new();
            for code in 0..total {
                let mut c = code;
                let word = Word::new(
                    (0..n)
                        .map(|_| {
                            let s = c % alpha;
                            c /= alpha;
                            s
                        })
                        .collect(),
                );
                let canon = canonical_necklace(&word);
                if seen.insert(canon.clone()) {
                    let orbit: std::collections::HashSet<Word> =
                        (0..n).map(|k| word.rotate(k)).collect();
                    orbit_size_sum += orbit.len();
                }
            }
            assert_eq!(orbit_size_sum, total);
        }
    }

    #[test]
    fn count_necklaces_overflow_signalled() {
        assert!(matches!(
            count_necklaces(10, 64),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn graph_validation() {
        assert!(TransitionGraph::new(2, &[(0, 1)]).is_err());
        assert!(TransitionGraph::new(2, &[(0, 2), (1, 0)]).is_err());
    }
}
