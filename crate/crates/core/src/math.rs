// Float helpers that work without std.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// `|x|^(1/j)` for the gauge; `j = 1` and `j = 2` avoid `pow`.
#[inline]
pub fn root_abs(x: f64, j: usize) -> f64 {
    match j {
        1 => x.abs(),
        2 => sqrt(x.abs()),
        3 => libm::cbrt(x.abs()),
        _ => powf(x.abs(), 1.0 / j as f64),
    }
}
