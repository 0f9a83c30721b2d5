//! Small triangulations: products with intervals and circles, surfaces, handlebodies,
//! lens spaces. Products use the staircase subdivision of σ × [a,b].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::homology::SimplicialComplex;

fn build(n: usize, facets: Vec<Vec<usize>>) -> SimplicialComplex {
    SimplicialComplex::new(n, &facets).expect("generator produced a valid complex")
}

/// Renumber the vertices used by `facets` to 0..n in increasing order.
pub fn reindex(facets: &[Vec<usize>]) -> (SimplicialComplex, BTreeMap<usize, usize>) {
    let used: BTreeSet<usize> = facets.iter().flatten().copied().collect();
    let map: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let fs = facets.iter().map(|f| f.iter().map(|v| map[v]).collect()).collect();
    (build(map.len(), fs), map)
}

pub fn simplex(d: usize) -> SimplicialComplex {
    build(d + 1, vec![(0..=d).collect()])
}

pub fn simplex_boundary(d: usize) -> SimplicialComplex {
    let fs = (0..=d).map(|i| (0..=d).filter(|&j| j != i).collect()).collect();
    build(d + 1, fs)
}

pub fn tetrahedron_boundary() -> SimplicialComplex {
    simplex_boundary(3)
}

pub fn sphere3() -> SimplicialComplex {
    simplex_boundary(4)
}

pub fn cycle(n: usize) -> SimplicialComplex {
    assert!(n >= 3);
    build(n, (0..n).map(|i| vec![i, (i + 1) % n]).collect())
}

fn staircase(s: &[usize], a: usize, b: usize, n: usize) -> Vec<Vec<usize>> {
    (0..s.len())
        .map(|j| {
            let mut t: Vec<usize> = s[..=j].iter().map(|v| v + a * n).collect();
            t.extend(s[j..].iter().map(|v| v + b * n));
            t
        })
        .collect()
}

/// K × [0,m] subdivided into m layers; vertex (v,i) ↦ v + i·n.
pub fn product_path(k: &SimplicialComplex, m: usize) -> SimplicialComplex {
    let n = k.n_vertices();
    let mut fs = Vec::new();
    for s in k.facets() {
        for i in 0..m {
            fs.extend(staircase(s, i, i + 1, n));
        }
    }
    build(n * (m + 1), fs)
}

pub fn product_interval(k: &SimplicialComplex) -> SimplicialComplex {
    product_path(k, 1)
}

/// K × C_m; vertex (v,i) ↦ v + i·n.
pub fn product_circle(k: &SimplicialComplex, m: usize) -> SimplicialComplex {
    assert!(m >= 3);
    let n = k.n_vertices();
    let mut fs = Vec::new();
    for s in k.facets() {
        for i in 0..m {
            fs.extend(staircase(s, i, (i + 1) % m, n));
        }
    }
    build(n * m, fs)
}

/// Möbius' 7-vertex torus.
pub fn seven_vertex_torus() -> SimplicialComplex {
    let mut fs = Vec::new();
    for i in 0..7 {
        fs.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
        fs.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
    }
    build(7, fs)
}

pub fn grid_torus(n: usize, m: usize) -> SimplicialComplex {
    product_circle(&cycle(n), m)
}

/// A 3 × (2g+1) square grid with g interior squares removed: a disk with g holes.
pub fn planar_surface(g: usize) -> SimplicialComplex {
    let w = 2 * g + 2;
    let id = |r: usize, c: usize| r * w + c;
    let mut fs = Vec::new();
    for r in 0..3 {
        for c in 0..2 * g + 1 {
            if r == 1 && c % 2 == 1 {
                continue;
            }
            fs.push(vec![id(r, c), id(r, c + 1), id(r + 1, c + 1)]);
            fs.push(vec![id(r, c), id(r + 1, c), id(r + 1, c + 1)]);
        }
    }
    build(4 * w, fs)
}

/// Genus-g handlebody as (planar surface) × I.
pub fn handlebody(g: usize) -> SimplicialComplex {
    product_interval(&planar_surface(g))
}

pub fn solid_torus() -> SimplicialComplex {
    handlebody(1)
}

/// Closed genus-g surface as the boundary of the handlebody.
pub fn closed_surface(g: usize) -> SimplicialComplex {
    reindex(&handlebody(g).boundary_faces()).0
}

/// Σ_g × I with Σ_g × {s} on vertices v + s·n.
pub fn surface_cylinder(g: usize) -> SimplicialComplex {
    product_interval(&closed_surface(g))
}

pub fn s2_times_s1() -> SimplicialComplex {
    product_circle(&tetrahedron_boundary(), 3)
}

pub fn three_torus() -> SimplicialComplex {
    product_circle(&grid_torus(3, 3), 3)
}

struct LensCover {
    m: usize,
    p: usize,
    q: usize,
}

impl LensCover {
    // vertices 0..m on the first circle, m..2m on the second
    fn act(&self, t: usize, v: usize) -> usize {
        let m = self.m;
        if v < m {
            (v + 2 * t) % m
        } else {
            m + (v - m + 2 * self.q * t) % m
        }
    }

    fn canon(&self, s: &[usize]) -> Vec<usize> {
        (0..self.p)
            .map(|t| {
                let mut x: Vec<usize> = s.iter().map(|&v| self.act(t, v)).collect();
                x.sort_unstable();
                x
            })
            .min()
            .unwrap()
    }

    fn tets(&self) -> Vec<Vec<usize>> {
        let m = self.m;
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                out.push(vec![a, (a + 1) % m, m + b, m + (b + 1) % m]);
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Barycentric subdivision of (C_{2p} * C_{2p}) / Z_p, the generator rotating the circles by
/// 2 and 2q steps. Returns the complex and, per vertex, whether its orbit meets the second circle.
fn lens_subdivision(p: usize, q: usize) -> Result<(SimplicialComplex, Vec<bool>)> {
    if p < 2 || num_integer::gcd(p, q) != 1 {
        return Err(Error::Invalid(format!("lens space L({p},{q}) needs p ≥ 2 and gcd(p,q) = 1")));
    }
    let cov = LensCover { m: 2 * p, p, q: q % p };
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut facets = BTreeSet::new();
    let perms = permutations(4);
    for t in cov.tets() {
        for perm in &perms {
            let mut flag = Vec::with_capacity(4);
            for i in 0..4 {
                let mut face: Vec<usize> = perm[..=i].iter().map(|&j| t[j]).collect();
                face.sort_unstable();
                let c = cov.canon(&face);
                let n = ids.len();
                flag.push(*ids.entry(c).or_insert(n));
            }
            flag.sort_unstable();
            facets.insert(flag);
        }
    }
    let mut meets = vec![false; ids.len()];
    for (s, &i) in &ids {
        meets[i] = s.iter().any(|&v| v >= cov.m);
    }
    Ok((build(ids.len(), facets.into_iter().collect()), meets))
}

pub fn lens_space(p: usize, q: usize) -> Result<SimplicialComplex> {
    Ok(lens_subdivision(p, q)?.0)
}

/// The solid torus in L(p,q) spanned by the barycentres of simplices meeting the second core circle.
pub fn lens_piece(p: usize, q: usize) -> Result<SimplicialComplex> {
    let (k, meets) = lens_subdivision(p, q)?;
    let fs: Vec<Vec<usize>> = k.facets().iter().filter(|f| f.iter().all(|&v| meets[v])).cloned().collect();
    Ok(reindex(&fs).0)
}

/// Disjoint union, the second complex shifted past the first.
pub fn disjoint_union(a: &SimplicialComplex, b: &SimplicialComplex) -> SimplicialComplex {
    let n = a.n_vertices();
    let mut fs = a.facets().to_vec();
    fs.extend(b.facets().iter().map(|f| f.iter().map(|v| v + n).collect()));
    build(n + b.n_vertices(), fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{cohomology, cohomology_closed, SimplicialPair};

    #[test]
    fn surfaces() {
        for g in 0..3 {
            let s = closed_surface(g);
            let b = cohomology_closed(&s).betti;
            assert_eq!(b, vec![1, 2 * g, 1, 0], "genus {g}");
            assert!(s.orientation().is_ok());
        }
        assert_eq!(cohomology_closed(&grid_torus(3, 4)).betti, vec![1, 2, 1, 0]);
    }

    #[test]
    fn three_manifolds() {
        assert_eq!(cohomology_closed(&three_torus()).betti, vec![1, 3, 3, 1]);
        assert_eq!(cohomology_closed(&s2_times_s1()).betti, vec![1, 1, 1, 1]);
        assert_eq!(cohomology_closed(&sphere3()).betti, vec![1, 0, 0, 1]);
        assert!(three_torus().orientation().is_ok());
    }

    #[test]
    fn lens_piece_is_solid_torus() {
        let x = lens_piece(3, 1).unwrap();
        let c = cohomology(&SimplicialPair::with_boundary(x).unwrap());
        assert_eq!(c.betti, vec![1, 1, 0, 0]);
        assert_eq!(c.boundary_betti.unwrap(), vec![1, 2, 1, 0]);
    }
}
