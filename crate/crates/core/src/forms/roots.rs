use num_complex::Complex64;

use super::binary::BinaryForm;
use super::FormsError;
use crate::scalar::Scalar;

/// A point of P^1 with its multiplicity as a root of a binary form. The point
/// is a unit vector with its largest entry real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster {
    pub point: [Complex64; 2],
    pub multiplicity: usize,
}

/// Chordal distance `|a0 b1 - a1 b0| / (|a| |b|)` on P^1.
pub fn chordal_distance(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    (a[0] * b[1] - a[1] * b[0]).norm() / (na * nb)
}

pub fn normalize_point(p: [Complex64; 2]) -> [Complex64; 2] {
    let n = (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
    let big = if p[0].norm() >= p[1].norm() { p[0] } else { p[1] };
    let phase = big.conj() / big.norm();
    [p[0] * phase / n, p[1] * phase / n]
}

/// Roots of a nonzero binary form on P^1 with multiplicities. Roots closer
/// than `radius` in the chordal metric are merged; a looser group (within
/// `sqrt(radius)`) is merged too when the form is within relative backward
/// error `radius^2` of having an `m`-fold root at the group's centroid, which
/// is how numerically split multiple roots look.
pub fn root_divisor<S: Scalar>(b: &BinaryForm<S>, radius: f64) -> Result<Vec<RootCluster>, FormsError> {
    let b = b.to_c64();
    if b.max_magnitude() == 0.0 {
        return Err(FormsError::ZeroForm);
    }
    let k = b.degree();
    if k == 0 {
        return Ok(Vec::new());
    }
    // Rotate so that [1:0] is far from every root: maximize |b'(1,0)|.
    let (rot, rotated) = best_rotation(&b);
    // In the rotated form, roots are [z:1] with z a root of sum c_i z^(k-i).
    let poly: Vec<Complex64> = rotated.normalized().coeffs().to_vec();
    let zs = aberth(&poly);
    let groups = group_roots(&poly, &zs, radius);
    let mut out: Vec<RootCluster> = groups
        .into_iter()
        .map(|(z, m)| {
            // back to original coordinates: t = rot * s
            let s = [z, Complex64::new(1.0, 0.0)];
            let t = [rot[0][0] * s[0] + rot[0][1] * s[1], rot[1][0] * s[0] + rot[1][1] * s[1]];
            RootCluster {
                point: normalize_point(t),
                multiplicity: m,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = (a.point[0].re, a.point[0].im, a.point[1].re, a.point[1].im);
        let kb = (b.point[0].re, b.point[0].im, b.point[1].re, b.point[1].im);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

type Rot = [[Complex64; 2]; 2];

fn best_rotation(b: &BinaryForm<Complex64>) -> (Rot, BinaryForm<Complex64>) {
    let c = |x: f64, y: f64| Complex64::new(x, y);
    let mut best: Option<(f64, Rot, BinaryForm<Complex64>)> = None;
    for n in 0..8 {
        let th = 0.37 + 0.71 * n as f64;
        let ph = 1.3 * n as f64;
        let (cs, sn) = (th.cos(), th.sin());
        let e = Complex64::from_polar(1.0, ph);
        // unitary: [[cs, -sn e*], [sn e, cs]]
        let rot = [[c(cs, 0.0), -e.conj() * sn], [e * sn, c(cs, 0.0)]];
        let r = b.substitute(&rot);
        let score = r.coeff(0).norm() / r.max_magnitude();
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, rot, r));
        }
        if score > 0.3 {
            break;
        }
    }
    let (_, rot, r) = best.expect("at least one rotation");
    (rot, r)
}

fn horner(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = p[0];
    let mut dv = Complex64::new(0.0, 0.0);
    for c in &p[1..] {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// Aberth-Ehrlich iteration for the roots of `p[0] z^k + ... + p[k]`.
fn aberth(p: &[Complex64]) -> Vec<Complex64> {
    let k = p.len() - 1;
    let lead = p[0];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let bound = 1.0 + monic[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = bound.min(monic[1..].iter().enumerate().map(|(i, c)| c.norm().powf(1.0 / (i + 1) as f64)).fold(0.0, f64::max) * 2.0).max(1e-3);
    let mut z: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * j as f64 / k as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..k {
            let (v, dv) = horner(&monic, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let sum: Complex64 = (0..k)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0) / diff
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() == 0.0 || !denom.is_finite() { ratio } else { ratio / denom };
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Taylor coefficients of `p` at `c`, constant term first.
fn taylor(p: &[Complex64], c: Complex64) -> Vec<Complex64> {
    // repeated synthetic division
    let mut a = p.to_vec();
    let k = a.len() - 1;
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let n = a.len();
        let mut q = Vec::with_capacity(n - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, coef) in a.iter().enumerate() {
            acc = acc * c + coef;
            if i + 1 < n {
                q.push(acc);
            }
        }
        out.push(acc);
        a = q;
        if a.is_empty() {
            break;
        }
    }
    out
}

fn chordal_z(a: Complex64, b: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    chordal_distance(&[a, one], &[b, one])
}

fn single_linkage(zs: &[Complex64], idx: &[usize], radius: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; idx.len()];
    for s in 0..idx.len() {
        if assigned[s] {
            continue;
        }
        assigned[s] = true;
        let mut group = vec![idx[s]];
        let mut frontier = vec![s];
        while let Some(a) = frontier.pop() {
            for b in 0..idx.len() {
                if !assigned[b] && chordal_z(zs[idx[a]], zs[idx[b]]) <= radius {
                    assigned[b] = true;
                    group.push(idx[b]);
                    frontier.push(b);
                }
            }
        }
        groups.push(group);
    }
    groups
}

fn centroid(zs: &[Complex64], group: &[usize]) -> Complex64 {
    group.iter().map(|&i| zs[i]).sum::<Complex64>() / group.len() as f64
}

fn group_roots(p: &[Complex64], zs: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let all: Vec<usize> = (0..zs.len()).collect();
    let loose = single_linkage(zs, &all, radius.sqrt());
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for group in loose {
        let m = group.len();
        let mut c = centroid(zs, &group);
        if m == 1 {
            out.push((c, 1));
            continue;
        }
        // An m-fold root is a simple root of the (m-1)-th derivative.
        let mut t = taylor(p, c);
        for _ in 0..30 {
            if t[m].norm() == 0.0 {
                break;
            }
            let step = t[m - 1] / (t[m] * m as f64);
            c -= step;
            t = taylor(p, c);
            if step.norm() <= 1e-16 * (1.0 + c.norm()) {
                break;
            }
        }
        let low = t[..m].iter().map(|x| x.norm()).fold(0.0, f64::max);
        let high = t[m..].iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300 * scale);
        if low <= radius * radius * high {
            out.push((c, m));
        } else {
            for sub in single_linkage(zs, &group, radius) {
                out.push((centroid(zs, &sub), sub.len()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn near(r: &RootCluster, p: [f64; 2]) -> bool {
        chordal_distance(&r.point, &[c(p[0]), c(p[1])]) < 1e-8
    }

    #[test]
    fn monomial_roots() {
        let b = BinaryForm::new(vec![c(0.0), c(0.0), c(1.0), c(0.0), c(0.0)]);
        let r = root_divisor(&b, 1e-6).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.multiplicity == 2));
        assert!(r.iter().any(|x| near(x, [1.0, 0.0])));
        assert!(r.iter().any(|x| near(x, [0.0, 1.0])));
    }

    #[test]
    fn triple_root() {
        let b = BinaryForm::from_roots(&[([c(2.0), c(1.0)], 3), ([c(-1.0), c(1.0)], 1)]);
        let r = root_divisor(&b, 1e-6).unwrap();
        assert_eq!(r.len(), 2);
        let triple = r.iter().find(|x| x.multiplicity == 3).unwrap();
        assert!(chordal_distance(&triple.point, &[c(2.0), c(1.0)]) < 1e-4);
        assert!(r.iter().any(|x| x.multiplicity == 1 && near(x, [-1.0, 1.0])));
    }

    #[test]
    fn zero_form_is_an_error() {
        let b = BinaryForm::new(vec![c(0.0); 3]);
        assert!(matches!(root_divisor(&b, 1e-6), Err(FormsError::ZeroForm)));
    }
}
