//! Smooth test functions with known derivatives.

use crate::geometry::Point;

/// A smooth real function of the plane with gradient and Laplacian.
pub trait ScalarField: Sync {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
    fn laplacian(&self, p: Point) -> f64;
}

type Fun<T> = Box<dyn Fn(Point) -> T + Send + Sync>;

/// A field given by closed-form expressions for value, gradient and Laplacian.
pub struct ClosedForm {
    pub name: String,
    value: Fun<f64>,
    gradient: Fun<[f64; 2]>,
    laplacian: Fun<f64>,
}

impl ClosedForm {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
        laplacian: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), value: Box::new(value), gradient: Box::new(gradient), laplacian: Box::new(laplacian) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c, |_| [0.0, 0.0], |_| 0.0)
    }

    /// `a0 + a1 x + a2 y`.
    pub fn linear(a0: f64, a1: f64, a2: f64) -> Self {
        Self::new("linear", move |p| a0 + a1 * p.x + a2 * p.y, move |_| [a1, a2], |_| 0.0)
    }

    pub fn re_z() -> Self {
        Self::new("re(z)", |p| p.x, |_| [1.0, 0.0], |_| 0.0)
    }

    pub fn im_z() -> Self {
        Self::new("im(z)", |p| p.y, |_| [0.0, 1.0], |_| 0.0)
    }

    pub fn re_z2() -> Self {
        Self::new("re(z^2)", |p| p.x * p.x - p.y * p.y, |p| [2.0 * p.x, -2.0 * p.y], |_| 0.0)
    }

    pub fn im_z2() -> Self {
        Self::new("im(z^2)", |p| 2.0 * p.x * p.y, |p| [2.0 * p.y, 2.0 * p.x], |_| 0.0)
    }

    /// `|z|^2`, with Laplacian 4.
    pub fn abs_z2() -> Self {
        Self::new("abs(z)^2", |p| p.x * p.x + p.y * p.y, |p| [2.0 * p.x, 2.0 * p.y], |_| 4.0)
    }

    /// `e^x cos y = Re e^z`.
    pub fn exp_cos() -> Self {
        Self::new(
            "exp(x)*cos(y)",
            |p| p.x.exp() * p.y.cos(),
            |p| [p.x.exp() * p.y.cos(), -p.x.exp() * p.y.sin()],
            |_| 0.0,
        )
    }
}

impl ScalarField for ClosedForm {
    fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        (self.gradient)(p)
    }

    fn laplacian(&self, p: Point) -> f64 {
        (self.laplacian)(p)
    }
}

impl std::fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ClosedForm({})", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let p = Point::new(0.3, -0.7);
        let e = 1e-4;
        for g in [ClosedForm::re_z2(), ClosedForm::im_z2(), ClosedForm::abs_z2(), ClosedForm::exp_cos()] {
            let dx = (g.value(Point::new(p.x + e, p.y)) - g.value(Point::new(p.x - e, p.y))) / (2.0 * e);
            let dy = (g.value(Point::new(p.x, p.y + e)) - g.value(Point::new(p.x, p.y - e))) / (2.0 * e);
            let gr = g.gradient(p);
            assert!((dx - gr[0]).abs() < 1e-7 && (dy - gr[1]).abs() < 1e-7, "{g:?}");
            let lap = (g.value(Point::new(p.x + e, p.y))
                + g.value(Point::new(p.x - e, p.y))
                + g.value(Point::new(p.x, p.y + e))
                + g.value(Point::new(p.x, p.y - e))
                - 4.0 * g.value(p))
                / (e * e);
            assert!((lap - g.laplacian(p)).abs() < 1e-5, "{g:?}");
        }
    }
}
