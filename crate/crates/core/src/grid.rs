//! Rectangular rasters over a window of the complex plane and their export.

use std::io::{self, Write};

use num_complex::Complex;

use crate::{Error, Result, Scalar};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    x0: T,
    x1: T,
    y0: T,
    y1: T,
}

impl<T: Scalar> Window<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::Schema(format!("degenerate window [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    /// `[-h, h]²`.
    pub fn square(h: f64) -> Self {
        Self::new(T::lit(-h), T::lit(h), T::lit(-h), T::lit(h)).expect("positive half-width")
    }

    pub fn bounds(&self) -> [T; 4] {
        [self.x0, self.x1, self.y0, self.y1]
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn cast<U: Scalar>(&self) -> Window<U> {
        Window { x0: U::lit(self.x0.as_f64()), x1: U::lit(self.x1.as_f64()), y0: U::lit(self.y0.as_f64()), y1: U::lit(self.y1.as_f64()) }
    }
}

/// Pixel layout of a window: `nx` columns, `ny` rows, row 0 at the top (`y1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Raster<T> {
    pub window: Window<T>,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Scalar> Raster<T> {
    pub fn new(window: Window<T>, nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0, "empty raster");
        Raster { window, nx, ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> T {
        (self.window.x1 - self.window.x0) / T::lit(self.nx as f64)
    }

    pub fn dy(&self) -> T {
        (self.window.y1 - self.window.y0) / T::lit(self.ny as f64)
    }

    /// Larger of the two pixel side lengths.
    pub fn pitch(&self) -> T {
        self.dx().max(self.dy())
    }

    pub fn center(&self, col: usize, row: usize) -> Complex<T> {
        let half = T::lit(0.5);
        Complex::new(
            self.window.x0 + (T::lit(col as f64) + half) * self.dx(),
            self.window.y1 - (T::lit(row as f64) + half) * self.dy(),
        )
    }

    pub fn center_of(&self, index: usize) -> Complex<T> {
        self.center(index % self.nx, index / self.nx)
    }

    /// Continuous pixel coordinates `(col, row)` of `z`, centers at integers.
    pub fn to_pixel(&self, z: Complex<T>) -> (T, T) {
        let half = T::lit(0.5);
        ((z.re - self.window.x0) / self.dx() - half, (self.window.y1 - z.im) / self.dy() - half)
    }

    /// Pixel containing `z`, if inside the window.
    pub fn pixel_of(&self, z: Complex<T>) -> Option<(usize, usize)> {
        if !self.window.contains(z) {
            return None;
        }
        let (c, r) = self.to_pixel(z);
        let half = T::lit(0.5);
        let col = (c + half).floor().as_f64().clamp(0.0, (self.nx - 1) as f64) as usize;
        let row = (r + half).floor().as_f64().clamp(0.0, (self.ny - 1) as f64) as usize;
        Some((col, row))
    }
}

/// Which vertex a field belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldVertex {
    Vertex(usize),
    Aggregate,
}

/// Scalar values on a raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    pub raster: Raster<T>,
    pub vertex: FieldVertex,
    pub values: Vec<T>,
}

impl<T: Scalar> GridField<T> {
    pub fn filled(raster: Raster<T>, vertex: FieldVertex, value: T) -> Self {
        GridField { raster, vertex, values: vec![value; raster.len()] }
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.values[row * self.raster.nx + col]
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        GridField { raster: self.raster, vertex: self.vertex, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |d, (a, b)| d.max((*a - *b).abs()))
    }

    /// Bilinear interpolation at continuous pixel coordinates, clamped to the
    /// pixel-center hull.
    pub fn bilinear(&self, col: T, row: T) -> T {
        let (nx, ny) = (self.raster.nx, self.raster.ny);
        let cx = col.max(T::zero()).min(T::lit((nx - 1) as f64));
        let cy = row.max(T::zero()).min(T::lit((ny - 1) as f64));
        let c0 = cx.floor().as_f64() as usize;
        let r0 = cy.floor().as_f64() as usize;
        let c1 = (c0 + 1).min(nx - 1);
        let r1 = (r0 + 1).min(ny - 1);
        let fx = cx - T::lit(c0 as f64);
        let fy = cy - T::lit(r0 as f64);
        let one = T::one();
        let top = self.get(c0, r0) * (one - fx) + self.get(c1, r0) * fx;
        let bottom = self.get(c0, r1) * (one - fx) + self.get(c1, r1) * fx;
        top * (one - fy) + bottom * fy
    }

    /// Writes one CSV line per row, values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in self.values.chunks(self.raster.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{}", v.as_f64())).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Binary PGM (`P5`). `maxval` 255 writes one byte per sample, 65535 two
    /// big-endian bytes. Values in `[0, 1]` quantize as `round(v · maxval)`.
    /// `comments` become `#` lines in the header.
    pub fn write_pgm<W: Write>(&self, mut out: W, maxval: u16, comments: &[String]) -> io::Result<()> {
        writeln!(out, "P5")?;
        for c in comments {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        writeln!(out, "{} {}\n{}", self.raster.nx, self.raster.ny, maxval)?;
        let mut bytes = Vec::with_capacity(self.values.len() * if maxval > 255 { 2 } else { 1 });
        for &v in &self.values {
            let q = quantize(v.as_f64(), maxval);
            if maxval > 255 {
                bytes.extend_from_slice(&q.to_be_bytes());
            } else {
                bytes.push(q as u8);
            }
        }
        out.write_all(&bytes)
    }
}

/// `round(clamp(v, 0, 1) · maxval)`.
pub fn quantize(v: f64, maxval: u16) -> u16 {
    (v.clamp(0.0, 1.0) * maxval as f64).round() as u16
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster() -> Raster<f64> {
        Raster::new(Window::square(2.0), 4, 4)
    }

    #[test]
    fn centers_and_pixels_agree() {
        let r = raster();
        assert_eq!(r.center(0, 0), Complex::new(-1.5, 1.5));
        assert_eq!(r.center(3, 3), Complex::new(1.5, -1.5));
        for idx in 0..r.len() {
            let z = r.center_of(idx);
            assert_eq!(r.pixel_of(z), Some((idx % 4, idx / 4)));
            let (c, row) = r.to_pixel(z);
            assert!((c - (idx % 4) as f64).abs() < 1e-12 && (row - (idx / 4) as f64).abs() < 1e-12);
        }
        assert_eq!(r.pixel_of(Complex::new(2.5, 0.0)), None);
    }

    #[test]
    fn bilinear_reproduces_affine_data() {
        let r = raster();
        let mut f = GridField::filled(r, FieldVertex::Vertex(0), 0.0);
        for idx in 0..r.len() {
            let z = r.center_of(idx);
            f.values[idx] = 0.25 * z.re - 0.1 * z.im + 0.5;
        }
        let (c, row) = r.to_pixel(Complex::new(0.3, -0.7));
        let v = f.bilinear(c, row);
        assert!((v - (0.25 * 0.3 + 0.07 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn pgm_header_and_payload() {
        let mut f = GridField::filled(Raster::new(Window::square(1.0), 2, 1), FieldVertex::Aggregate, 0.0);
        f.values = vec![0.5, 1.0];
        let mut buf = Vec::new();
        f.write_pgm(&mut buf, 65535, &["seed 7".into()]).unwrap();
        let header = b"P5\n# seed 7\n2 1\n65535\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(&buf[header.len()..], &[0x80, 0x00, 0xff, 0xff]);
        let mut buf = Vec::new();
        f.write_pgm(&mut buf, 255, &[]).unwrap();
        assert_eq!(&buf[buf.len() - 2..], &[128, 255]);
    }

    #[test]
    fn csv_rows() {
        let mut f = GridField::filled(Raster::new(Window::square(1.0), 2, 2), FieldVertex::Aggregate, 0.0);
        f.values = vec![0.0, 0.25, 1.0, 0.5];
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,0.25\n1,0.5\n");
    }

    #[test]
    fn degenerate_window_is_rejected() {
        assert!(Window::<f64>::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
