//! Simplicial (co)homology over Z and R, boundary surfaces, and the restriction Lagrangian L_X.
//!
//! Simplices are sorted vertex tuples; [v0<…<vq] carries the orientation of its vertex order.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::Lagrangian;
use crate::zlattice::{
    int, integer_kernel, lattice_basis, saturate, solve_integer, sparse_from_i64, sparse_invariant_factors, IntMatrix,
    Rat, SparseElim, SparseVec,
};

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    n_vertices: usize,
    facets: Vec<Vec<usize>>,
    faces: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: usize,
    pub simplices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<Vec<usize>>>,
}

fn subsets(s: &[usize]) -> Vec<Vec<usize>> {
    let n = s.len();
    (1..(1u32 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect())
        .collect()
}

/// Sign of the permutation sorting `v` (distinct entries).
pub fn sort_sign(v: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                s = -s;
            }
        }
    }
    s
}

impl SimplicialComplex {
    pub fn new(n_vertices: usize, facets: &[Vec<usize>]) -> Result<Self> {
        let mut fs: Vec<Vec<usize>> = Vec::with_capacity(facets.len());
        for f in facets {
            let mut s = f.clone();
            s.sort_unstable();
            if s.is_empty() || s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Complex(format!("degenerate simplex {f:?}")));
            }
            if s.len() > 4 {
                return Err(Error::Complex(format!("simplex {f:?} has dimension > 3")));
            }
            if s.iter().any(|&v| v >= n_vertices) {
                return Err(Error::Complex(format!("vertex out of range in {f:?}")));
            }
            fs.push(s);
        }
        let dim = fs.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut sets: Vec<std::collections::BTreeSet<Vec<usize>>> = vec![Default::default(); dim];
        for f in &fs {
            for s in subsets(f) {
                sets[s.len() - 1].insert(s);
            }
        }
        let faces: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = faces.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        Ok(SimplicialComplex { n_vertices, facets: fs, faces, index })
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        Self::new(j.vertices, &j.simplices)
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson { vertices: self.n_vertices, simplices: self.facets.clone(), boundary: None }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Top dimension (-1 for the empty complex is reported as None).
    pub fn dim(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    pub fn simplices(&self, q: usize) -> &[Vec<usize>] {
        self.faces.get(q).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, q: usize) -> usize {
        self.simplices(q).len()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    pub fn euler(&self) -> i64 {
        (0..self.faces.len()).map(|q| if q % 2 == 0 { self.count(q) as i64 } else { -(self.count(q) as i64) }).sum()
    }

    /// ∂_q : C_q → C_{q-1} as sparse columns, restricted to simplices accepted by `keep`
    /// (rows and columns renumbered in order).
    pub fn boundary_columns(&self, q: usize, keep: &dyn Fn(usize, usize) -> bool) -> (usize, Vec<Vec<(usize, i64)>>) {
        if q == 0 {
            return (0, vec![vec![]; (0..self.count(0)).filter(|&i| keep(0, i)).count()]);
        }
        let mut row_map = vec![usize::MAX; self.count(q - 1)];
        let mut nrows = 0;
        for (i, r) in row_map.iter_mut().enumerate() {
            if keep(q - 1, i) {
                *r = nrows;
                nrows += 1;
            }
        }
        let mut cols = Vec::new();
        for (j, s) in self.simplices(q).iter().enumerate() {
            if !keep(q, j) {
                continue;
            }
            let mut col = Vec::with_capacity(s.len());
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                let r = row_map[self.index_of(&f).unwrap()];
                if r != usize::MAX {
                    col.push((r, if i % 2 == 0 { 1 } else { -1 }));
                }
            }
            cols.push(col);
        }
        (nrows, cols)
    }

    /// Coboundary δ^q : C^q → C^{q+1} as a dense integer matrix.
    pub fn coboundary_matrix(&self, q: usize) -> IntMatrix {
        let (_, cols) = self.boundary_columns(q + 1, &|_, _| true);
        let mut m = IntMatrix::zeros(self.count(q + 1), self.count(q));
        for (j, c) in cols.iter().enumerate() {
            for &(r, v) in c {
                m.set(j, r, int(v));
            }
        }
        m
    }

    /// Codimension-one faces of the top simplices having exactly one coface (for pure complexes
    /// this is the boundary of the underlying pseudo-manifold).
    pub fn boundary_faces(&self) -> Vec<Vec<usize>> {
        let Some(d) = self.dim() else { return vec![] };
        if d == 0 {
            return vec![];
        }
        let mut cnt: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for s in self.simplices(d) {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                *cnt.entry(f).or_default() += 1;
            }
        }
        cnt.into_iter().filter(|(_, c)| *c == 1).map(|(f, _)| f).collect()
    }

    /// Coherent orientation signs of the top simplices, or an error if not orientable / not a
    /// pseudo-manifold (a codimension-one face with more than two cofaces).
    pub fn orientation(&self) -> Result<Vec<i64>> {
        let d = self.dim().ok_or_else(|| Error::Complex("empty complex".into()))?;
        let tops = self.simplices(d);
        let mut by_face: HashMap<Vec<usize>, Vec<(usize, i64)>> = HashMap::new();
        for (t, s) in tops.iter().enumerate() {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                by_face.entry(f).or_default().push((t, if i % 2 == 0 { 1 } else { -1 }));
            }
        }
        if by_face.values().any(|v| v.len() > 2) {
            return Err(Error::Complex("not a pseudo-manifold".into()));
        }
        let mut sign = vec![0i64; tops.len()];
        let mut adj: Vec<Vec<(usize, i64)>> = vec![vec![]; tops.len()];
        for v in by_face.values() {
            if v.len() == 2 {
                // s_a·ε_a + s_b·ε_b = 0  ⇒  s_b = -s_a ε_a ε_b
                let ((a, ea), (b, eb)) = (v[0], v[1]);
                adj[a].push((b, -ea * eb));
                adj[b].push((a, -ea * eb));
            }
        }
        for start in 0..tops.len() {
            if sign[start] != 0 {
                continue;
            }
            sign[start] = 1;
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                for &(b, rel) in &adj[a] {
                    let want = sign[a] * rel;
                    if sign[b] == 0 {
                        sign[b] = want;
                        queue.push_back(b);
                    } else if sign[b] != want {
                        return Err(Error::Complex("not orientable".into()));
                    }
                }
            }
        }
        Ok(sign)
    }

    /// Boundary surface with its induced orientation: the faces of ∂(Σ s_T T) with signs.
    pub fn oriented_boundary(&self) -> Result<Vec<(Vec<usize>, i64)>> {
        let d = self.dim().ok_or_else(|| Error::Complex("empty complex".into()))?;
        let sign = self.orientation()?;
        let mut acc: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (t, s) in self.simplices(d).iter().enumerate() {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                *acc.entry(f).or_default() += sign[t] * if i % 2 == 0 { 1 } else { -1 };
            }
        }
        Ok(acc.into_iter().filter(|(_, c)| *c != 0).collect())
    }

    /// Top simplices of a closed oriented surface with their coherent signs.
    pub fn oriented_surface(&self) -> Result<Vec<(Vec<usize>, i64)>> {
        if self.dim() != Some(2) {
            return Err(Error::Complex("not a surface".into()));
        }
        let s = self.orientation()?;
        Ok(self.simplices(2).iter().cloned().zip(s).collect())
    }

    pub fn boundary_complex(&self) -> Result<SimplicialComplex> {
        SimplicialComplex::new(self.n_vertices, &self.boundary_faces())
    }

    /// Connected components, as lists of vertex ids (isolated unused vertices are ignored).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for e in self.simplices(1) {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in self.simplices(0) {
            let r = find(&mut parent, v[0]);
            groups.entry(r).or_default().push(v[0]);
        }
        groups.into_values().collect()
    }
}

#[derive(Clone, Debug)]
pub struct SimplicialPair {
    pub x: SimplicialComplex,
    pub a: SimplicialComplex,
}

impl SimplicialPair {
    pub fn new(x: SimplicialComplex, a: SimplicialComplex) -> Result<Self> {
        for q in 0..=a.dim().unwrap_or(0) {
            for s in a.simplices(q) {
                if x.index_of(s).is_none() {
                    return Err(Error::Complex(format!("subcomplex simplex {s:?} not in X")));
                }
            }
        }
        Ok(SimplicialPair { x, a })
    }

    /// X together with its topological boundary.
    pub fn with_boundary(x: SimplicialComplex) -> Result<Self> {
        let a = x.boundary_complex()?;
        Self::new(x, a)
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        let x = SimplicialComplex::from_json(j)?;
        match &j.boundary {
            Some(b) => Self::new(x.clone(), SimplicialComplex::new(j.vertices, b)?),
            None => Self::with_boundary(x),
        }
    }

    pub fn in_a(&self, q: usize, i: usize) -> bool {
        self.a.index_of(&self.x.simplices(q)[i]).is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyProfile {
    pub betti: Vec<usize>,
    /// invariant factors > 1 of H²(X;Z)
    pub torsion_h2: Vec<BigInt>,
    pub rel_betti: Option<Vec<usize>>,
    pub rel_torsion_h2: Option<Vec<BigInt>>,
    pub boundary_betti: Option<Vec<usize>>,
}

impl CohomologyProfile {
    pub fn b(&self, q: usize) -> usize {
        self.betti.get(q).copied().unwrap_or(0)
    }

    pub fn rel_b(&self, q: usize) -> usize {
        self.rel_betti.as_ref().and_then(|v| v.get(q).copied()).unwrap_or(0)
    }

    pub fn boundary_b(&self, q: usize) -> usize {
        self.boundary_betti.as_ref().and_then(|v| v.get(q).copied()).unwrap_or(0)
    }

    pub fn tors_order(&self) -> BigInt {
        self.torsion_h2.iter().product()
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_betti.as_ref().is_some_and(|b| b.iter().any(|&x| x > 0))
    }
}

struct Groups {
    betti: Vec<usize>,
    torsion: Vec<Vec<BigInt>>,
}

/// Betti numbers b^0..b^3 and torsion of H^{q} (q = 0..4) of the cochains on simplices accepted by keep.
fn groups(x: &SimplicialComplex, keep: &dyn Fn(usize, usize) -> bool) -> Groups {
    let top = 4;
    let mut ranks = vec![0usize; top + 1];
    let mut tors = vec![Vec::new(); top + 2];
    let mut dims = vec![0usize; top + 1];
    for q in 0..=3 {
        dims[q] = (0..x.count(q)).filter(|&i| keep(q, i)).count();
    }
    for q in 1..=3 {
        // rank δ^{q-1} = rank ∂_q; Tors H^q = nontrivial invariant factors of δ^{q-1}
        let (nrows, cols) = x.boundary_columns(q, keep);
        let f = sparse_invariant_factors(nrows, &cols);
        ranks[q] = f.len();
        tors[q] = f.into_iter().filter(|v| !v.is_one()).collect();
    }
    let betti = (0..=3).map(|q| dims[q] - ranks[q + 1].min(dims[q]) - ranks[q]).collect();
    Groups { betti, torsion: tors }
}

pub fn cohomology_closed(x: &SimplicialComplex) -> CohomologyProfile {
    let g = groups(x, &|_, _| true);
    CohomologyProfile { betti: g.betti, torsion_h2: g.torsion[2].clone(), rel_betti: None, rel_torsion_h2: None, boundary_betti: None }
}

pub fn cohomology(p: &SimplicialPair) -> CohomologyProfile {
    let abs = groups(&p.x, &|_, _| true);
    let rel = groups(&p.x, &|q, i| !p.in_a(q, i));
    let bd = groups(&p.a, &|_, _| true);
    CohomologyProfile {
        betti: abs.betti,
        torsion_h2: abs.torsion[2].clone(),
        rel_betti: Some(rel.betti),
        rel_torsion_h2: Some(rel.torsion[2].clone()),
        boundary_betti: Some(bd.betti),
    }
}

/// m_X = ¼(b¹ + b¹_rel − b⁰ − b⁰_rel) with boundary, ½(b¹ − b⁰) when closed.
pub fn m_exponent(p: &CohomologyProfile) -> Rat {
    let (b0, b1) = (p.b(0) as i64, p.b(1) as i64);
    if p.has_boundary() {
        Rat::new(int(b1 + p.rel_b(1) as i64 - b0 - p.rel_b(0) as i64), int(4))
    } else {
        Rat::new(int(b1 - b0), int(2))
    }
}

pub fn fiber_dimension_q(p: &CohomologyProfile) -> i64 {
    p.rel_b(1) as i64 - p.boundary_b(0) as i64 + p.b(0) as i64 - p.rel_b(0) as i64
}

/// b¹ − b¹_rel + b⁰_rel − b⁰ + b⁰(∂) = ½ b¹(∂)
pub fn lefschetz_identity(p: &CohomologyProfile) -> bool {
    let lhs = p.b(1) as i64 - p.rel_b(1) as i64 + p.rel_b(0) as i64 - p.b(0) as i64 + p.boundary_b(0) as i64;
    2 * lhs == p.boundary_b(1) as i64
}

/// 2^{χ(∂X)/2}: the constant relating the analytic and Reidemeister norms on the determinant line.
pub fn analytic_torsion_factor(chi_boundary: i64) -> f64 {
    2f64.powf(chi_boundary as f64 / 2.0)
}

// ---------------------------------------------------------------------------
// Closed oriented surfaces

/// An integral symplectic basis of H¹(Σ;Z) of a closed oriented (possibly disconnected)
/// triangulated surface, with ω(e_i,f_j) = δ_ij for the cup-product form ⟨α∪β,[Σ]⟩.
#[derive(Clone, Debug)]
pub struct SurfaceBasis {
    /// oriented triangles (sorted vertices, sign)
    pub triangles: Vec<(Vec<usize>, i64)>,
    /// sorted edges indexing the cochains below
    pub edges: Vec<Vec<usize>>,
    /// tree–cotree cycles γ (edge chains), dual to `dual_cocycles`
    pub cycles: Vec<Vec<i64>>,
    pub dual_cocycles: Vec<Vec<i64>>,
    /// symplectic basis (e_1..e_g, f_1..f_g) in dual_cocycle coordinates
    pub change: IntMatrix,
    pub genus: usize,
}

impl SurfaceBasis {
    pub fn edge_index(&self, e: &[usize]) -> Option<usize> {
        self.edges.binary_search_by(|x| x.as_slice().cmp(e)).ok()
    }

    /// Cocycle (edge values) of the i-th symplectic basis element.
    pub fn cocycle(&self, i: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.edges.len()];
        for (j, z) in self.dual_cocycles.iter().enumerate() {
            let c = self.change.get(j, i);
            if c.is_zero() {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(z) {
                *o += c * v;
            }
        }
        out
    }

    /// Cup-product Gram matrix of arbitrary edge cochains.
    pub fn cup(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        let mut s = BigInt::zero();
        for (t, eps) in &self.triangles {
            let e01 = self.edge_index(&[t[0], t[1]]).unwrap();
            let e12 = self.edge_index(&[t[1], t[2]]).unwrap();
            s += &a[e01] * &b[e12] * eps;
        }
        s
    }

    /// Coordinates of an integral cocycle class in the symplectic basis.
    pub fn coordinates(&self, z: &[BigInt]) -> Vec<BigInt> {
        // pair with the cycles: dual-cocycle coordinates, then change basis
        let zc: Vec<BigInt> =
            self.cycles.iter().map(|c| c.iter().zip(z).map(|(x, y)| y * x).sum::<BigInt>()).collect();
        self.change.inverse_unimodular().unwrap().mul_vec(&zc).unwrap()
    }
}

/// Build the tree–cotree homology basis and a symplectic cohomology basis.
pub fn surface_basis(triangles: &[(Vec<usize>, i64)]) -> Result<SurfaceBasis> {
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for (t, _) in triangles {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            edges.push(vec![t[a], t[b]]);
        }
    }
    edges.sort();
    edges.dedup();
    let eidx = |e: &[usize]| edges.binary_search_by(|x| x.as_slice().cmp(e)).unwrap();
    let ne = edges.len();
    let mut edge_tris: Vec<Vec<usize>> = vec![vec![]; ne];
    for (i, (t, _)) in triangles.iter().enumerate() {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            edge_tris[eidx(&[t[a], t[b]])].push(i);
        }
    }
    if edge_tris.iter().any(|v| v.len() != 2) {
        return Err(Error::Complex("not a closed surface (edge with ≠ 2 triangles)".into()));
    }
    let nv = edges.iter().flatten().max().map_or(0, |m| m + 1);
    let mut vadj: Vec<Vec<(usize, usize)>> = vec![vec![]; nv];
    for (i, e) in edges.iter().enumerate() {
        vadj[e[0]].push((e[1], i));
        vadj[e[1]].push((e[0], i));
    }
    // primal spanning forest
    let mut in_tree = vec![false; ne];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    let mut roots = Vec::new();
    for v0 in 0..nv {
        if seen[v0] || vadj[v0].is_empty() {
            continue;
        }
        roots.push(v0);
        seen[v0] = true;
        let mut q = VecDeque::from([v0]);
        while let Some(v) = q.pop_front() {
            for &(w, e) in &vadj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    in_tree[e] = true;
                    q.push_back(w);
                }
            }
        }
    }
    // dual spanning forest over non-tree edges
    let nt = triangles.len();
    let mut tseen = vec![false; nt];
    let mut in_cotree = vec![false; ne];
    let mut tparent: Vec<Option<usize>> = vec![None; nt]; // cotree edge to parent
    let mut order = Vec::new();
    for t0 in 0..nt {
        if tseen[t0] {
            continue;
        }
        tseen[t0] = true;
        let mut q = VecDeque::from([t0]);
        while let Some(t) = q.pop_front() {
            order.push(t);
            let s = &triangles[t].0;
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let e = eidx(&[s[a], s[b]]);
                if in_tree[e] {
                    continue;
                }
                for &u in &edge_tris[e] {
                    if !tseen[u] {
                        tseen[u] = true;
                        in_cotree[e] = true;
                        tparent[u] = Some(e);
                        q.push_back(u);
                    }
                }
            }
        }
    }
    let leftover: Vec<usize> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();

    let path_to_root = |mut v: usize| -> Vec<(usize, i64)> {
        // edges from v up to its root, with the sign of traversal (towards the root)
        let mut out = Vec::new();
        while let Some((p, e)) = parent[v] {
            out.push((e, if v < p { 1 } else { -1 }));
            v = p;
        }
        out
    };
    let mut cycles = Vec::new();
    let mut cocycles = Vec::new();
    for &e in &leftover {
        let (a, b) = (edges[e][0], edges[e][1]);
        // a → b along e, then b → root → a
        let mut c = vec![0i64; ne];
        c[e] += 1;
        for (f, s) in path_to_root(b) {
            c[f] += s;
        }
        for (f, s) in path_to_root(a) {
            c[f] -= s;
        }
        cycles.push(c);
        // dual cocycle by peeling the cotree
        let mut z: Vec<Option<i64>> = (0..ne).map(|f| if in_cotree[f] { None } else { Some(0) }).collect();
        z[e] = Some(1);
        for &t in order.iter().rev() {
            let Some(pe) = tparent[t] else { continue };
            let s = &triangles[t].0;
            // z[v1v2] − z[v0v2] + z[v0v1] = 0
            let es = [(eidx(&[s[1], s[2]]), 1i64), (eidx(&[s[0], s[2]]), -1), (eidx(&[s[0], s[1]]), 1)];
            let mut acc = 0i64;
            let mut coef = 0i64;
            for (f, sg) in es {
                if f == pe {
                    coef = sg;
                } else {
                    acc += sg * z[f].expect("peeling order");
                }
            }
            z[pe] = Some(-acc * coef);
        }
        cocycles.push(z.into_iter().map(|x| x.unwrap()).collect::<Vec<i64>>());
    }
    let n = leftover.len();
    if !n.is_multiple_of(2) {
        return Err(Error::Complex("odd first Betti number for a surface".into()));
    }
    let mut basis = SurfaceBasis {
        triangles: triangles.to_vec(),
        edges,
        cycles,
        dual_cocycles: cocycles,
        change: IntMatrix::identity(n),
        genus: n / 2,
    };
    let zs: Vec<Vec<BigInt>> = basis.dual_cocycles.iter().map(|z| z.iter().map(|&x| int(x)).collect()).collect();
    let gram = IntMatrix::from_fn(n, n, |i, j| basis.cup(&zs[i], &zs[j]));
    basis.change = symplectic_gram_schmidt(&gram)?;
    Ok(basis)
}

/// Columns P with Pᵀ G P = J, for an antisymmetric unimodular integer Gram matrix G.
/// Each step picks the first remaining generator v, a partner u with ω(v,u) = 1, and projects
/// the rest onto the ω-complement of span(v,u).
pub fn symplectic_gram_schmidt(gram: &IntMatrix) -> Result<IntMatrix> {
    let n = gram.rows();
    let om = |x: &[BigInt], y: &[BigInt]| -> BigInt { gram.mul_vec(y).unwrap().iter().zip(x).map(|(a, b)| a * b).sum() };
    let mut rest: Vec<Vec<BigInt>> = IntMatrix::identity(n).columns();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    while !rest.is_empty() {
        let v = rest[0].clone();
        let pair = IntMatrix::from_fn(1, rest.len(), |_, j| om(&v, &rest[j]));
        let c = solve_integer(&pair, &[int(1)]).ok_or_else(|| Error::Complex("intersection form is not unimodular".into()))?;
        let mut u = vec![BigInt::zero(); n];
        for (cj, b) in c.iter().zip(&rest) {
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui += cj * bi;
            }
        }
        let proj: Vec<Vec<BigInt>> = rest
            .iter()
            .map(|x| {
                let (a, b) = (om(x, &v), om(x, &u));
                x.iter().zip(&v).zip(&u).map(|((xi, vi), ui)| xi + &a * ui - &b * vi).collect()
            })
            .collect();
        es.push(v);
        fs.push(u);
        let m = IntMatrix::from_columns(&proj, n)?;
        rest = if m.is_zero() { vec![] } else { lattice_basis(&m).columns() };
    }
    let cols: Vec<Vec<BigInt>> = es.into_iter().chain(fs).collect();
    IntMatrix::from_columns(&cols, n)
}

/// Surface bases per connected component of an oriented surface (components ordered by smallest vertex).
pub fn component_bases(triangles: &[(Vec<usize>, i64)]) -> Result<Vec<SurfaceBasis>> {
    let facets: Vec<Vec<usize>> = triangles.iter().map(|(t, _)| t.clone()).collect();
    let nv = facets.iter().flatten().max().map_or(0, |m| m + 1);
    let k = SimplicialComplex::new(nv, &facets)?;
    let comps = k.components();
    let mut out = Vec::new();
    for c in comps {
        let set: std::collections::HashSet<usize> = c.into_iter().collect();
        let tris: Vec<(Vec<usize>, i64)> = triangles.iter().filter(|(t, _)| set.contains(&t[0])).cloned().collect();
        out.push(surface_basis(&tris)?);
    }
    Ok(out)
}

/// Restriction data for a 3-manifold with boundary: the boundary's symplectic bases and L_X.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub components: Vec<SurfaceBasis>,
    pub lagrangian: Lagrangian,
}

impl BoundaryData {
    pub fn genus(&self) -> usize {
        self.components.iter().map(|c| c.genus).sum()
    }
}

/// L_X = image of H¹(X;R) → H¹(∂X;R) as a primitive Lagrangian in the boundary symplectic
/// coordinates (e¹…, e²…, f¹…, f²… over components). `bases` overrides the computed boundary bases.
pub fn boundary_lagrangian_with(x: &SimplicialComplex, bases: Option<Vec<SurfaceBasis>>) -> Result<BoundaryData> {
    let tris = x.oriented_boundary()?;
    if x.dim() != Some(3) {
        return Err(Error::Complex("boundary_lagrangian needs a 3-dimensional complex".into()));
    }
    let comps = match bases {
        Some(b) => b,
        None => component_bases(&tris)?,
    };
    let g: usize = comps.iter().map(|c| c.genus).sum();
    if g == 0 {
        return Ok(BoundaryData { components: comps, lagrangian: Lagrangian::standard(0) });
    }
    // homology cycles of ∂X as chains on the edges of X
    let mut red = SparseElim::new();
    let (_, cols) = x.boundary_columns(2, &|_, _| true);
    for c in cols {
        let _ = red.insert(sparse_from_i64(&c), SparseVec::new());
    }
    let mut residues: Vec<BTreeMap<usize, Rat>> = Vec::new();
    for c in &comps {
        for cyc in &c.cycles {
            let mut v = BTreeMap::new();
            for (ei, &m) in cyc.iter().enumerate() {
                if m != 0 {
                    let r = x.index_of(&c.edges[ei]).ok_or_else(|| Error::Complex("boundary edge not in X".into()))?;
                    v.insert(r, Rat::from_integer(int(m)));
                }
            }
            residues.push(red.reduce(v, SparseVec::new()).0);
        }
    }
    // K = {u : Σ u_i residue_i = 0}, integer kernel of the residue matrix
    let rows: Vec<usize> = {
        let mut s: Vec<usize> = residues.iter().flat_map(|r| r.keys().cloned()).collect();
        s.sort();
        s.dedup();
        s
    };
    let n = residues.len();
    let k = if rows.is_empty() {
        IntMatrix::identity(n)
    } else {
        // clear denominators column by column
        let mut m = IntMatrix::zeros(rows.len(), n);
        for (j, r) in residues.iter().enumerate() {
            let den = r.values().fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
            for (i, row) in rows.iter().enumerate() {
                if let Some(x) = r.get(row) {
                    m.set(i, j, (x * Rat::from_integer(den.clone())).to_integer());
                }
            }
        }
        integer_kernel(&m)
    };
    // K^⊥ in dual-cocycle coordinates, then into the symplectic coordinates
    let kperp = if k.cols() == 0 { IntMatrix::identity(n) } else { integer_kernel(&k.transpose()) };
    let ds = layout(&comps);
    // block change-of-basis (dual coords -> symplectic coords): x_B = P⁻¹ x_z per component
    let mut pinv = IntMatrix::zeros(n, n);
    let mut off = 0;
    for (ci, c) in comps.iter().enumerate() {
        let inv = c.change.inverse_unimodular()?;
        let m = 2 * c.genus;
        for i in 0..m {
            for j in 0..m {
                pinv.set(ds[ci][i], off + j, inv.get(i, j).clone());
            }
        }
        off += m;
    }
    let lx = pinv.mul(&kperp)?;
    let lag = Lagrangian::from_span(g, &saturate(&lx))?;
    Ok(BoundaryData { components: comps, lagrangian: lag })
}

/// Global coordinate of component-local index i (e's then f's) in the (e¹…, e²…, f¹…, f²…) layout.
pub fn layout(comps: &[SurfaceBasis]) -> Vec<Vec<usize>> {
    let g: usize = comps.iter().map(|c| c.genus).sum();
    let mut out = Vec::new();
    let mut off = 0;
    for c in comps {
        let mut m = Vec::new();
        for i in 0..2 * c.genus {
            m.push(if i < c.genus { off + i } else { g + off + i - c.genus });
        }
        off += c.genus;
        out.push(m);
    }
    out
}

pub fn boundary_lagrangian(p: &SimplicialPair) -> Result<BoundaryData> {
    boundary_lagrangian_with(&p.x, None)
}

/// Check that a supplied orientation-reversed copy of a basis is symplectic for −Σ: returns the
/// basis with f ↦ −f (the reflection R), suitable for the −Σ end of a cylinder.
pub fn reversed_basis(b: &SurfaceBasis, triangles: Vec<(Vec<usize>, i64)>, vmap: &dyn Fn(usize) -> usize) -> Result<SurfaceBasis> {
    let remap = |e: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = e.iter().map(|&x| vmap(x)).collect();
        v.sort();
        v
    };
    let mut edges: Vec<Vec<usize>> = b.edges.iter().map(|e| remap(e)).collect();
    let perm: Vec<usize> = {
        let mut idx: Vec<usize> = (0..edges.len()).collect();
        idx.sort_by(|&i, &j| edges[i].cmp(&edges[j]));
        idx
    };
    // orientation of mapped edges must be preserved (vmap monotone on edges)
    for e in &b.edges {
        if vmap(e[0]) > vmap(e[1]) {
            return Err(Error::Complex("vertex map reverses an edge".into()));
        }
    }
    let reorder = |v: &Vec<i64>| -> Vec<i64> { perm.iter().map(|&i| v[i]).collect() };
    edges = perm.iter().map(|&i| edges[i].clone()).collect();
    let g = b.genus;
    let r = IntMatrix::from_fn(2 * g, 2 * g, |i, j| if i != j { int(0) } else if i < g { int(1) } else { int(-1) });
    let out = SurfaceBasis {
        triangles,
        edges,
        cycles: b.cycles.iter().map(reorder).collect(),
        dual_cocycles: b.dual_cocycles.iter().map(reorder).collect(),
        change: b.change.mul(&r)?,
        genus: g,
    };
    // verify symplecticity against the new orientation
    let cs: Vec<Vec<BigInt>> = (0..2 * g).map(|i| out.cocycle(i)).collect();
    for i in 0..2 * g {
        for j in 0..2 * g {
            let want = if j == i + g { 1 } else if i == j + g { -1 } else { 0 };
            if out.cup(&cs[i], &cs[j]) != int(want) {
                return Err(Error::Complex("transported basis is not symplectic on the reversed end".into()));
            }
        }
    }
    Ok(out)
}

/// Boundary data of a product K × I (vertices v + s·n): the basis of the top end is computed,
/// and the bottom end gets its vertex-wise copy with f ↦ −f, so that L_X is the graph of id.
pub fn cylinder_boundary(x: &SimplicialComplex, n: usize) -> Result<BoundaryData> {
    let tris = x.oriented_boundary()?;
    let (bottom, top): (Vec<_>, Vec<_>) = tris.into_iter().partition(|(t, _)| t[0] < n);
    let top_b = component_bases(&top)?;
    if top_b.len() != 1 {
        return Err(Error::Unsupported("cylinder over a disconnected surface".into()));
    }
    let bot = reversed_basis(&top_b[0], bottom, &|v| v - n)?;
    boundary_lagrangian_with(x, Some(vec![bot, top_b.into_iter().next().unwrap()]))
}

pub fn torsion_order(factors: &[BigInt]) -> BigInt {
    factors.iter().fold(BigInt::one(), |a, b| a * b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulate as tri;

    #[test]
    fn sphere_and_torus() {
        let s2 = tri::tetrahedron_boundary();
        let p = cohomology_closed(&s2);
        assert_eq!(p.betti, vec![1, 0, 1, 0]);
        assert!(p.torsion_h2.is_empty());
        let t = tri::seven_vertex_torus();
        assert_eq!(cohomology_closed(&t).betti, vec![1, 2, 1, 0]);
        assert_eq!(t.count(0), 7);
        let b = surface_basis(&t.oriented_surface().unwrap()).unwrap();
        assert_eq!(b.genus, 1);
    }

    #[test]
    fn closed_exponents() {
        let s3 = tri::sphere3();
        let p = cohomology_closed(&s3);
        assert_eq!(m_exponent(&p), Rat::new(int(-1), int(2)));
        let s2s1 = tri::s2_times_s1();
        assert_eq!(m_exponent(&cohomology_closed(&s2s1)), Rat::zero());
    }

    #[test]
    fn solid_torus_pair() {
        let p = SimplicialPair::with_boundary(tri::handlebody(1)).unwrap();
        let c = cohomology(&p);
        assert_eq!(c.betti, vec![1, 1, 0, 0]);
        assert_eq!(m_exponent(&c), Rat::zero());
        assert_eq!(fiber_dimension_q(&c), 0);
        assert!(lefschetz_identity(&c));
        let bd = boundary_lagrangian(&p).unwrap();
        assert_eq!(bd.lagrangian.genus(), 1);
    }

    #[test]
    fn genus_two_handlebody() {
        let p = SimplicialPair::with_boundary(tri::handlebody(2)).unwrap();
        let c = cohomology(&p);
        assert!(lefschetz_identity(&c));
        let bd = boundary_lagrangian(&p).unwrap();
        assert_eq!(bd.lagrangian.genus(), 2);
    }

    #[test]
    fn cylinder_is_graph_of_identity() {
        for g in 1..=2 {
            let s = tri::closed_surface(g);
            let x = tri::surface_cylinder(g);
            let bd = cylinder_boundary(&x, s.n_vertices()).unwrap();
            let id = crate::symplectic::SpElement::identity(g);
            assert_eq!(bd.lagrangian, crate::symplectic::graph_lagrangian(&id));
            let c = cohomology(&SimplicialPair::with_boundary(x).unwrap());
            assert_eq!(m_exponent(&c), Rat::new(int(g as i64), int(2)));
            assert!(lefschetz_identity(&c));
        }
    }

    #[test]
    fn symplectic_bases_are_symplectic() {
        let s = tri::closed_surface(2);
        let b = surface_basis(&s.oriented_surface().unwrap()).unwrap();
        let cs: Vec<_> = (0..4).map(|i| b.cocycle(i)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let want = if j == i + 2 { 1 } else if i == j + 2 { -1 } else { 0 };
                assert_eq!(b.cup(&cs[i], &cs[j]), int(want));
            }
        }
        for i in 0..4 {
            let mut e = vec![int(0); 4];
            e[i] = int(1);
            assert_eq!(b.coordinates(&cs[i]), e);
        }
    }

    #[test]
    fn lens_torsion() {
        for (p, q) in [(2, 1), (3, 1), (5, 2)] {
            let l = tri::lens_space(p, q).unwrap();
            let c = cohomology_closed(&l);
            assert_eq!(c.betti, vec![1, 0, 0, 1]);
            assert_eq!(c.torsion_h2, vec![int(p as i64)]);
        }
    }
}
