//! Double-double complex arithmetic for the few kernels that suffer from
//! cancellation (Taylor shifts around clustered roots).

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    pub(crate) fn from(z: Complex64) -> Self {
        Cdd { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    pub(crate) fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }

    pub(crate) fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub(crate) fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        // (1 + 2⁻⁴⁰)² − 1 loses everything below 2⁻⁵² in plain doubles
        let x = Cdd::from(Complex64::new(1.0 + 2f64.powi(-40), 0.0));
        let y = x.mul(x).add(Cdd::from(Complex64::new(-1.0, 0.0))).to_c64();
        let exact = 2f64.powi(-39) + 2f64.powi(-80);
        assert_eq!(y.re, exact);
    }

    #[test]
    fn complex_product() {
        let a = Cdd::from(Complex64::new(1.5, -2.0));
        let b = Cdd::from(Complex64::new(-0.5, 4.0));
        assert_eq!(a.mul(b).to_c64(), Complex64::new(1.5, -2.0) * Complex64::new(-0.5, 4.0));
    }
}
