use super::{FieldPoint, FieldSource, Jet};
use crate::error::{MagflowError, Result};

/// Uniform periodic grid geometry with fourth-order central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicStencil {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl PeriodicStencil {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(MagflowError::GridTooSmall { nx, ny });
        }
        Ok(PeriodicStencil { nx, ny, lx, ly })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(MagflowError::GridMismatch(format!(
                "array of length {} on a {}x{} grid",
                f.len(),
                self.nx,
                self.ny
            )));
        }
        Ok(())
    }

    pub fn d_dx_at(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let h = self.lx / self.nx as f64;
        let at = |di: isize| {
            let ii = (i as isize + di).rem_euclid(self.nx as isize) as usize;
            f[self.index(ii, j)]
        };
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
    }

    pub fn d_dy_at(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let h = self.ly / self.ny as f64;
        let at = |dj: isize| {
            let jj = (j as isize + dj).rem_euclid(self.ny as isize) as usize;
            f[self.index(i, jj)]
        };
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
    }

    pub fn d_dx(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        Ok((0..self.len())
            .map(|idx| self.d_dx_at(f, idx % self.nx, idx / self.nx))
            .collect())
    }

    pub fn d_dy(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        Ok((0..self.len())
            .map(|idx| self.d_dy_at(f, idx % self.nx, idx / self.nx))
            .collect())
    }
}

/// Field values sampled on a uniform periodic grid, `y` outer and `x` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    degree: usize,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    data: Vec<f64>,
}

impl FieldGrid {
    /// `data` holds `2N` values per site, sites ordered row-major with `y` outer.
    pub fn new(degree: usize, nx: usize, ny: usize, lx: f64, ly: f64, data: Vec<f64>) -> Result<Self> {
        if degree == 0 || nx == 0 || ny == 0 {
            return Err(MagflowError::Validation(
                "degree and grid dimensions must be positive".into(),
            ));
        }
        if !(lx > 0.0 && ly > 0.0) {
            return Err(MagflowError::Validation(format!(
                "periods must be positive, got {lx} x {ly}"
            )));
        }
        let width = 2 * degree;
        if data.len() != nx * ny * width {
            return Err(MagflowError::Validation(format!(
                "expected {} values, got {}",
                nx * ny * width,
                data.len()
            )));
        }
        for (site, chunk) in data.chunks(width).enumerate() {
            if !(chunk[0] > 0.0) {
                return Err(MagflowError::Validation(format!(
                    "Lambda = {} <= 0 at site i={}, j={}",
                    chunk[0],
                    site % nx,
                    site / nx
                )));
            }
        }
        Ok(FieldGrid {
            degree,
            nx,
            ny,
            lx,
            ly,
            data,
        })
    }

    /// Samples a field source at `x_i = i·Lx/NX`, `y_j = j·Ly/NY`.
    pub fn sample<S: FieldSource + ?Sized>(source: &S, nx: usize, ny: usize) -> Result<Self> {
        let (lx, ly) = source.periods();
        let mut data = Vec::with_capacity(nx * ny * 2 * source.degree());
        for j in 0..ny {
            for i in 0..nx {
                let jet = source.jet(i as f64 * lx / nx as f64, j as f64 * ly / ny as f64)?;
                data.extend_from_slice(jet.point.values());
            }
        }
        FieldGrid::new(source.degree(), nx, ny, lx, ly, data)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn periods(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.lx / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.ly / self.ny as f64
    }

    pub fn stencil(&self) -> Result<PeriodicStencil> {
        PeriodicStencil::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn point(&self, i: usize, j: usize) -> FieldPoint {
        let w = 2 * self.degree;
        let start = (j * self.nx + i) * w;
        FieldPoint::new(self.degree, self.data[start..start + w].to_vec())
            .expect("grid sites are validated on construction")
    }

    /// One unknown as a scalar grid array.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.chunks(2 * self.degree).map(|s| s[c]).collect()
    }

    /// Values and fourth-order periodic central-difference derivatives at a site.
    pub fn grid_jet(&self, i: usize, j: usize) -> Result<Jet> {
        self.stencil()?;
        let w = 2 * self.degree;
        let mut dx = vec![0.0; w];
        let mut dy = vec![0.0; w];
        for c in 0..w {
            let at = |ii: usize, jj: usize| self.data[(jj * self.nx + ii) * w + c];
            let hx = self.lx / self.nx as f64;
            let hy = self.ly / self.ny as f64;
            let ip = |d: isize| (i as isize + d).rem_euclid(self.nx as isize) as usize;
            let jp = |d: isize| (j as isize + d).rem_euclid(self.ny as isize) as usize;
            dx[c] = (8.0 * (at(ip(1), j) - at(ip(-1), j)) - (at(ip(2), j) - at(ip(-2), j)))
                / (12.0 * hx);
            dy[c] = (8.0 * (at(i, jp(1)) - at(i, jp(-1))) - (at(i, jp(2)) - at(i, jp(-2))))
                / (12.0 * hy);
        }
        Jet::new(self.point(i, j), dx, dy)
    }

    /// All site jets, in storage order.
    pub fn jets(&self) -> Result<Vec<Jet>> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(self.grid_jet(i, j)?);
            }
        }
        Ok(out)
    }
}

/// Continuous field built from a grid: values and precomputed grid
/// derivatives are bilinearly interpolated.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: FieldGrid,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl GridField {
    pub fn new(grid: FieldGrid) -> Result<Self> {
        let w = 2 * grid.degree;
        let mut dx = Vec::with_capacity(grid.data.len());
        let mut dy = Vec::with_capacity(grid.data.len());
        for jet in grid.jets()? {
            debug_assert_eq!(jet.dx.len(), w);
            dx.extend_from_slice(&jet.dx);
            dy.extend_from_slice(&jet.dy);
        }
        Ok(GridField { grid, dx, dy })
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }
}

impl FieldSource for GridField {
    fn degree(&self) -> usize {
        self.grid.degree
    }

    fn periods(&self) -> (f64, f64) {
        (self.grid.lx, self.grid.ly)
    }

    fn jet(&self, x: f64, y: f64) -> Result<Jet> {
        let g = &self.grid;
        let w = 2 * g.degree;
        let sx = (x / g.lx * g.nx as f64).rem_euclid(g.nx as f64);
        let sy = (y / g.ly * g.ny as f64).rem_euclid(g.ny as f64);
        let (i0, j0) = (sx.floor() as usize % g.nx, sy.floor() as usize % g.ny);
        let (tx, ty) = (sx - sx.floor(), sy - sy.floor());
        let (i1, j1) = ((i0 + 1) % g.nx, (j0 + 1) % g.ny);
        let corners = [
            ((j0 * g.nx + i0) * w, (1.0 - tx) * (1.0 - ty)),
            ((j0 * g.nx + i1) * w, tx * (1.0 - ty)),
            ((j1 * g.nx + i0) * w, (1.0 - tx) * ty),
            ((j1 * g.nx + i1) * w, tx * ty),
        ];
        let interp = |arr: &[f64]| -> Vec<f64> {
            (0..w)
                .map(|c| corners.iter().map(|&(base, wt)| wt * arr[base + c]).sum())
                .collect()
        };
        let values = interp(&g.data);
        if !(values[0] > 0.0) {
            return Err(MagflowError::BlowUp { x, y });
        }
        Jet::new(FieldPoint::new(g.degree, values)?, interp(&self.dx), interp(&self.dy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FourierFieldSpec, Mode};

    #[test]
    fn constant_grid_has_zero_derivatives() {
        let data = [2.0, 0.5].repeat(64);
        let g = FieldGrid::new(1, 8, 8, 1.0, 1.0, data).unwrap();
        let jet = g.grid_jet(3, 5).unwrap();
        assert!(jet.dx.iter().chain(&jet.dy).all(|d| d.abs() < 1e-14));
    }

    #[test]
    fn small_grid_rejected_for_derivatives() {
        let g = FieldGrid::new(1, 4, 8, 1.0, 1.0, [1.0, 0.0].repeat(32)).unwrap();
        assert!(matches!(
            g.grid_jet(0, 0),
            Err(MagflowError::GridTooSmall { nx: 4, ny: 8 })
        ));
    }

    #[test]
    fn negative_lambda_names_site() {
        let mut data = [1.0, 0.0].repeat(64);
        data[2 * 10] = -1.0;
        let err = FieldGrid::new(1, 8, 8, 1.0, 1.0, data).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("i=2") && msg.contains("j=1"), "{msg}");
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let spec = FourierFieldSpec::new(
            1,
            1.0,
            1.0,
            vec![vec![], vec![Mode::new(1, 1, 0.5, 0.0), Mode::new(-1, -1, 0.5, 0.0)]],
        )
        .unwrap();
        let grid = FieldGrid::sample(&spec, 16, 16).unwrap();
        let field = GridField::new(grid.clone()).unwrap();
        let jet = field.jet(grid.x(3), grid.y(7)).unwrap();
        assert!((jet.point.u(0) - grid.point(3, 7).u(0)).abs() < 1e-15);
    }
}
