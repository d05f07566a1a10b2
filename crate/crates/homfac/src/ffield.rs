//! Exact arithmetic in F_{p^R} with deterministic element indexing.
//!
//! Elements are value-indexed: the element with coefficient vector
//! (c_0, .., c_{R-1}) over F_p gets index `sum c_i * p^i`, so graphs over
//! the field use the element index directly as the vertex number. The
//! modulus and primitive element are chosen deterministically, which makes
//! every downstream connection set reproducible byte-for-byte.

use crate::{Error, Result};

/// Default bound on the field size p^R.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 20;

/// A field element, stored as its index in `[0, q-1]`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// An exact representation of F_{p^R}.
///
/// `modulus` holds the coefficients c_0..c_{R-1} of the monic irreducible
/// polynomial x^R + c_{R-1} x^{R-1} + .. + c_0 used for the quotient;
/// `omega` is a fixed primitive element and `dlog` maps every nonzero
/// index to its discrete logarithm base omega.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
    pub q: u32,
    pub modulus: Vec<u32>,
    pub omega: FieldElem,
    dlog: Vec<u32>,
    exp: Vec<u32>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over F_p, low-degree-first, used only during field
/// construction (irreducibility and primitivity testing).
#[derive(Clone, PartialEq, Eq, Debug)]
struct Poly(Vec<u32>);

impl Poly {
    fn trim(mut v: Vec<u32>) -> Poly {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
        Poly(v)
    }
    fn x() -> Poly {
        Poly(vec![0, 1])
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
    fn deg(&self) -> usize {
        self.0.len() - 1
    }

    fn mul_mod(&self, other: &Poly, modulus: &[u32], p: u32) -> Poly {
        let r = modulus.len();
        let mut prod = vec![0u64; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u64 * b as u64) % p as u64;
            }
        }
        // reduce x^k = -modulus_lower * x^{k-r} for k >= r
        for k in (r..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (slot, &m) in prod[k - r..k].iter_mut().zip(modulus.iter()) {
                let sub = c * m as u64 % p as u64;
                *slot = (*slot + p as u64 - sub) % p as u64;
            }
        }
        prod.truncate(r.max(1));
        Poly::trim(prod.into_iter().map(|c| c as u32).collect())
    }

    fn pow_mod(&self, mut e: u64, modulus: &[u32], p: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly(vec![1]);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus, p);
            }
            base = base.mul_mod(&base, modulus, p);
            e >>= 1;
        }
        acc
    }

    fn sub(&self, other: &Poly, p: u32) -> Poly {
        let n = self.0.len().max(other.0.len());
        let v: Vec<u32> = (0..n)
            .map(|i| {
                let a = *self.0.get(i).unwrap_or(&0);
                let b = *other.0.get(i).unwrap_or(&0);
                (a + p - b) % p
            })
            .collect();
        Poly::trim(v)
    }

    fn rem(&self, divisor: &Poly, p: u32) -> Poly {
        let d = divisor.deg();
        assert!(d > 0, "remainder by a constant");
        let mut rem = self.0.clone();
        let lead_inv = mod_inverse(divisor.0[d], p);
        loop {
            let rd = {
                let mut k = rem.len();
                while k > 1 && rem[k - 1] == 0 {
                    k -= 1;
                }
                k - 1
            };
            if rd < d {
                break;
            }
            let coef = rem[rd] as u64 * lead_inv as u64 % p as u64;
            rem[rd] = 0;
            if coef == 0 {
                continue;
            }
            for i in 0..d {
                let sub = coef * divisor.0[i] as u64 % p as u64;
                let idx = rd - d + i;
                rem[idx] = ((rem[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        Poly::trim(rem)
    }

    fn gcd(a: &Poly, b: &Poly, p: u32) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            if b.deg() == 0 {
                return b;
            }
            let r = a.rem(&b, p);
            a = b;
            b = r;
        }
        a
    }
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    // Fermat; p prime.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let r = modulus.len() as u64;
    // x^{p^r} == x mod f, and gcd(x^{p^{r/t}} - x, f) = 1 for prime t | r.
    let x = Poly::x();
    let mut fr = x.clone();
    for _ in 0..r {
        fr = fr.pow_mod(p as u64, modulus, p);
    }
    if fr != x {
        return false;
    }
    let mut f_coeffs = modulus.to_vec();
    f_coeffs.push(1);
    let f = Poly(f_coeffs);
    for t in prime_factors(r) {
        let mut g = x.clone();
        for _ in 0..r / t {
            g = g.pow_mod(p as u64, modulus, p);
        }
        let diff = g.sub(&x, p);
        let gcd = Poly::gcd(&f, &diff, p);
        if gcd.deg() > 0 {
            return false;
        }
    }
    true
}

fn x_is_primitive(modulus: &[u32], p: u32, q: u64) -> bool {
    let x = Poly::x();
    for t in prime_factors(q - 1) {
        let pw = x.pow_mod((q - 1) / t, modulus, p);
        if pw == Poly(vec![1]) {
            return false;
        }
    }
    true
}

/// Builds F_{p^R} with the default size bound.
pub fn make_field(p: u32, r: u32) -> Result<FieldSpec> {
    make_field_capped(p, r, DEFAULT_FIELD_CAP)
}

/// Builds F_{p^R}.
///
/// For R >= 2 the modulus is the lexicographically smallest monic
/// irreducible polynomial (coefficients compared low-degree-first) whose
/// root class x is primitive; omega is then that class. For R = 1 omega is
/// the smallest primitive root mod p and the modulus is x - omega.
pub fn make_field_capped(p: u32, r: u32, cap: u64) -> Result<FieldSpec> {
    if !is_prime(p as u64) {
        return Err(Error::invalid(format!("p = {p} is not prime")));
    }
    if r < 1 {
        return Err(Error::invalid("R must be >= 1"));
    }
    let q = (p as u64).checked_pow(r).filter(|&q| q <= cap);
    let q = match q {
        Some(q) => q,
        None => return Err(Error::cap(format!("p^R exceeds field cap {cap}"))),
    };

    if r == 1 {
        let g = (1..p)
            .find(|&g| {
                prime_factors(p as u64 - 1)
                    .iter()
                    .all(|&t| pow_mod_u64(g as u64, (p as u64 - 1) / t, p as u64) != 1)
            })
            .unwrap_or(1);
        let modulus = vec![(p - g) % p];
        return Ok(finish_field(p, 1, q as u32, modulus, g));
    }

    // Odometer over (c_0, .., c_{R-1}) in lexicographic order, c_0 major.
    let mut coeffs = vec![0u32; r as usize];
    loop {
        if is_irreducible(&coeffs, p) && x_is_primitive(&coeffs, p, q) {
            return Ok(finish_field(p, r, q as u32, coeffs, p));
        }
        let mut pos = r as usize;
        loop {
            if pos == 0 {
                // Primitive polynomials exist for every (p, R); exhausting
                // the odometer indicates a bug upstream.
                return Err(Error::invalid(format!(
                    "no primitive modulus found for p={p}, R={r}"
                )));
            }
            pos -= 1;
            coeffs[pos] += 1;
            if coeffs[pos] < p {
                break;
            }
            coeffs[pos] = 0;
        }
    }
}

fn pow_mod_u64(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

fn finish_field(p: u32, r: u32, q: u32, modulus: Vec<u32>, omega_index: u32) -> FieldSpec {
    let mut field = FieldSpec {
        p,
        r,
        q,
        modulus,
        omega: FieldElem(omega_index),
        dlog: vec![u32::MAX; q as usize],
        exp: vec![0; (q - 1) as usize],
    };
    let mut cur = FieldElem::ONE;
    for i in 0..(q - 1) as usize {
        field.exp[i] = cur.0;
        debug_assert_eq!(field.dlog[cur.index()], u32::MAX, "omega is not primitive");
        field.dlog[cur.index()] = i as u32;
        cur = field.mul_by_x_class(cur, omega_index);
    }
    debug_assert_eq!(cur, FieldElem::ONE);
    field
}

impl FieldSpec {
    fn decode(&self, x: FieldElem) -> Vec<u32> {
        let mut v = vec![0u32; self.r as usize];
        let mut n = x.0;
        for c in v.iter_mut() {
            *c = n % self.p;
            n /= self.p;
        }
        v
    }

    fn encode(&self, v: &[u32]) -> FieldElem {
        let mut idx = 0u64;
        for &c in v.iter().rev() {
            idx = idx * self.p as u64 + c as u64;
        }
        FieldElem(idx as u32)
    }

    /// Multiplication by the class of x (for R = 1, by the residue omega).
    fn mul_by_x_class(&self, e: FieldElem, omega_index: u32) -> FieldElem {
        if self.r == 1 {
            return FieldElem((e.0 as u64 * omega_index as u64 % self.p as u64) as u32);
        }
        let v = self.decode(e);
        let carry = v[self.r as usize - 1];
        let mut w = vec![0u32; self.r as usize];
        w[1..].copy_from_slice(&v[..self.r as usize - 1]);
        if carry != 0 {
            for (slot, &m) in w.iter_mut().zip(self.modulus.iter()) {
                let sub = carry as u64 * m as u64 % self.p as u64;
                *slot = ((*slot as u64 + self.p as u64 - sub) % self.p as u64) as u32;
            }
        }
        self.encode(&w)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = FieldElem> {
        (1..self.q).map(FieldElem)
    }

    pub fn add(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        if self.r == 1 {
            return FieldElem((x.0 + y.0) % self.p);
        }
        let a = self.decode(x);
        let b = self.decode(y);
        let v: Vec<u32> = a.iter().zip(&b).map(|(&a, &b)| (a + b) % self.p).collect();
        self.encode(&v)
    }

    pub fn neg(&self, x: FieldElem) -> FieldElem {
        if self.r == 1 {
            return FieldElem((self.p - x.0) % self.p);
        }
        let v: Vec<u32> = self.decode(x).iter().map(|&c| (self.p - c) % self.p).collect();
        self.encode(&v)
    }

    pub fn sub(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        if x.is_zero() || y.is_zero() {
            return FieldElem::ZERO;
        }
        let e = (self.dlog[x.index()] as u64 + self.dlog[y.index()] as u64) % (self.q as u64 - 1);
        FieldElem(self.exp[e as usize])
    }

    pub fn inv(&self, x: FieldElem) -> Result<FieldElem> {
        if x.is_zero() {
            return Err(Error::invalid("inversion of zero"));
        }
        let e = (self.q as u64 - 1 - self.dlog[x.index()] as u64) % (self.q as u64 - 1);
        Ok(FieldElem(self.exp[e as usize]))
    }

    /// x^e, accepting negative exponents via the inverse.
    pub fn pow(&self, x: FieldElem, e: i64) -> Result<FieldElem> {
        if x.is_zero() {
            if e > 0 {
                return Ok(FieldElem::ZERO);
            }
            if e == 0 {
                return Ok(FieldElem::ONE);
            }
            return Err(Error::invalid("inversion of zero"));
        }
        let m = self.q as i64 - 1;
        let e = e.rem_euclid(m) as u64;
        let d = self.dlog[x.index()] as u64 * e % (self.q as u64 - 1);
        Ok(FieldElem(self.exp[d as usize]))
    }

    /// omega^e for any integer exponent.
    pub fn omega_pow(&self, e: i64) -> FieldElem {
        let m = self.q as i64 - 1;
        FieldElem(self.exp[e.rem_euclid(m) as usize])
    }

    /// x -> x^{p^j}.
    pub fn frobenius(&self, x: FieldElem, j: u32) -> FieldElem {
        if x.is_zero() {
            return FieldElem::ZERO;
        }
        let pj = pow_mod_u64(self.p as u64, j as u64 % self.r as u64, self.q as u64 - 1);
        let d = self.dlog[x.index()] as u64 * pj % (self.q as u64 - 1);
        FieldElem(self.exp[d as usize])
    }

    pub fn dlog(&self, x: FieldElem) -> Result<u32> {
        if x.is_zero() {
            return Err(Error::invalid("dlog of zero"));
        }
        Ok(self.dlog[x.index()])
    }

    /// True iff x lies in the subfield F_{p^a}; requires a | R.
    pub fn in_subfield(&self, x: FieldElem, a: u32) -> Result<bool> {
        if a == 0 || self.r % a != 0 {
            return Err(Error::invalid(format!("a = {a} does not divide R = {}", self.r)));
        }
        Ok(x.is_zero() || self.frobenius(x, a) == x)
    }

    /// The multiplicative coset omega^shift * <omega^k> as a sorted set.
    pub fn power_coset(&self, k: u32, shift: u64) -> Vec<FieldElem> {
        assert!(k >= 1 && (self.q - 1) % k == 0);
        let mut out: Vec<FieldElem> = (0..(self.q - 1) / k)
            .map(|i| FieldElem(self.exp[((i as u64 * k as u64 + shift) % (self.q as u64 - 1)) as usize]))
            .collect();
        out.sort();
        out
    }

    /// All elements of the subfield F_{p^a} (a | R), sorted by index.
    pub fn subfield_elements(&self, a: u32) -> Result<Vec<FieldElem>> {
        if a == 0 || self.r % a != 0 {
            return Err(Error::invalid(format!("a = {a} does not divide R = {}", self.r)));
        }
        let sub_order = (self.p as u64).pow(a) - 1;
        let k = ((self.q as u64 - 1) / sub_order) as u32;
        let mut v = vec![FieldElem::ZERO];
        v.extend(self.power_coset(k, 0));
        v.sort();
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_unit_is_primitive() {
        let f = make_field(2, 1).unwrap();
        assert_eq!(f.omega, FieldElem(1));
        assert_eq!(f.q, 2);
    }

    #[test]
    fn f5_smallest_primitive_root() {
        // brute-force order check of 2, 3, 4 mod 5
        let ord = |g: u64| (1..).find(|&e| pow_mod_u64(g, e, 5) == 1).unwrap();
        assert_eq!(ord(2), 4);
        assert_eq!(ord(3), 4);
        assert_eq!(ord(4), 2);
        let f = make_field(5, 1).unwrap();
        assert_eq!(f.omega, FieldElem(2));
    }

    #[test]
    fn f9_omega_has_order_8() {
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.q, 9);
        let mut ord = 0;
        let mut cur = FieldElem::ONE;
        for i in 1..=8 {
            cur = f.mul(cur, f.omega);
            if cur == FieldElem::ONE {
                ord = i;
                break;
            }
        }
        assert_eq!(ord, 8);
    }

    #[test]
    fn field_axioms_spot_checks() {
        for (p, r) in [(2, 1), (5, 1), (3, 2), (2, 2), (7, 2), (2, 4), (3, 4)] {
            let f = make_field(p, r).unwrap();
            for x in f.nonzero() {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), FieldElem::ONE);
                assert_eq!(f.add(x, f.neg(x)), FieldElem::ZERO);
            }
            // associativity / distributivity spot checks on small triples
            let sample: Vec<FieldElem> = f.elements().take(5).collect();
            for &a in &sample {
                for &b in &sample {
                    for &c in &sample {
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn f9_pow_and_neg() {
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.pow(f.omega, 8).unwrap(), FieldElem::ONE);
        // omega^{(q-1)/2} = -1, the unique element of order 2
        let minus_one = f.omega_pow(4);
        for x in f.nonzero() {
            assert_eq!(f.neg(x), f.mul(x, minus_one));
        }
    }

    #[test]
    fn frobenius_fixes_prime_subfield() {
        let f = make_field(3, 2).unwrap();
        let fixed: Vec<FieldElem> = f.elements().filter(|&x| f.frobenius(x, 1) == x).collect();
        assert_eq!(fixed.len(), 3);
        for x in fixed {
            assert!(f.in_subfield(x, 1).unwrap());
        }
    }

    #[test]
    fn frobenius_on_f4_squares_omega() {
        let f = make_field(2, 2).unwrap();
        assert_eq!(f.frobenius(f.omega, 1), f.mul(f.omega, f.omega));
    }

    #[test]
    fn frobenius_identity_and_homomorphism() {
        let f = make_field(2, 4).unwrap();
        for x in f.elements() {
            assert_eq!(f.frobenius(x, 4), x);
            for y in [FieldElem(3), FieldElem(7), f.omega] {
                assert_eq!(f.frobenius(f.add(x, y), 1), f.add(f.frobenius(x, 1), f.frobenius(y, 1)));
                assert_eq!(f.frobenius(f.mul(x, y), 1), f.mul(f.frobenius(x, 1), f.frobenius(y, 1)));
            }
        }
    }

    #[test]
    fn dlog_examples() {
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.dlog(FieldElem::ONE).unwrap(), 0);
        assert_eq!(f.dlog(f.omega).unwrap(), 1);
        let minus_one = f.neg(FieldElem::ONE);
        assert_eq!(f.dlog(minus_one).unwrap(), 4);
        assert!(f.dlog(FieldElem::ZERO).is_err());
    }

    #[test]
    fn dlog_is_multiplicative() {
        let f = make_field(7, 2).unwrap();
        for x in f.nonzero() {
            for y in [FieldElem(1), FieldElem(5), f.omega, FieldElem(13)] {
                let lhs = f.dlog(f.mul(x, y)).unwrap() as u64;
                let rhs = (f.dlog(x).unwrap() as u64 + f.dlog(y).unwrap() as u64) % (f.q as u64 - 1);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn subfield_membership() {
        let f9 = make_field(3, 2).unwrap();
        assert!(f9.in_subfield(FieldElem::ZERO, 1).unwrap());
        assert!(!f9.in_subfield(f9.omega, 1).unwrap());
        let f16 = make_field(2, 4).unwrap();
        let w5 = f16.omega_pow(5);
        assert!(f16.in_subfield(w5, 2).unwrap());
        assert!(f16.in_subfield(FieldElem::ZERO, 2).unwrap());
        assert!(f16.in_subfield(FieldElem::ZERO, 1).unwrap());
        assert!(f16.in_subfield(w5, 1).is_ok());
        assert!(!f16.in_subfield(f16.omega, 2).unwrap());
        assert!(f9.in_subfield(f9.omega, 3).is_err());
    }

    #[test]
    fn frobenius_permutes_power_cosets() {
        // x -> x^{p^j} maps { w^i : i = c mod d } onto { w^i : i = c p^j mod d }
        let f = make_field(3, 4).unwrap();
        for d in [2u32, 4, 5, 8, 10] {
            assert_eq!((f.q - 1) % d, 0);
            for c in 0..d.min(4) {
                for j in 1..f.r {
                    let src = f.power_coset(d, c as u64);
                    let image: std::collections::BTreeSet<FieldElem> =
                        src.iter().map(|&x| f.frobenius(x, j)).collect();
                    let pj = pow_mod_u64(f.p as u64, j as u64, d as u64);
                    let target: std::collections::BTreeSet<FieldElem> =
                        f.power_coset(d, (c as u64 * pj) % d as u64).into_iter().collect();
                    assert_eq!(image, target);
                }
            }
        }
    }

    #[test]
    fn index_roundtrip_is_bijection() {
        let f = make_field(3, 4).unwrap();
        for x in f.elements() {
            assert_eq!(f.encode(&f.decode(x)), x);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_field(4, 1).is_err());
        assert!(make_field(6, 2).is_err());
        assert!(make_field(2, 0).is_err());
        assert!(matches!(make_field(2, 21), Err(Error::CapExceeded(_))));
    }
}
