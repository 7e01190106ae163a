use crate::CubeError;

/// Pixel geometry. `origin_*` is the min corner; row 0 / col 0 sit against it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        pixel_size: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, CubeError> {
        if width == 0 || height == 0 || !(pixel_size > 0.0) {
            return Err(CubeError::BadGrid);
        }
        Ok(GridSpec { origin_x, origin_y, pixel_size, width, height })
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.pixel_size,
            self.origin_y + (row as f64 + 0.5) * self.pixel_size,
        )
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dense time x variable x row x col array. Missing values are stored as NaN
/// internally; the public accessors speak Option so NaN never leaks into math.
#[derive(Debug, Clone)]
pub struct Cube {
    pub grid: GridSpec,
    pub dates: Vec<u32>,
    pub variables: Vec<String>,
    values: Vec<f64>,
}

impl Cube {
    pub fn new(
        grid: GridSpec,
        dates: Vec<u32>,
        variables: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self, CubeError> {
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(CubeError::UnsortedDates);
        }
        let expected = dates.len() * variables.len() * grid.len();
        if values.len() != expected {
            return Err(CubeError::ShapeMismatch { expected, got: values.len() });
        }
        Ok(Cube { grid, dates, variables, values })
    }

    /// All-missing cube, to be filled with `set` before use.
    pub fn empty(grid: GridSpec, dates: Vec<u32>, variables: Vec<String>) -> Result<Self, CubeError> {
        let n = dates.len() * variables.len() * grid.len();
        Cube::new(grid, dates, variables, vec![f64::NAN; n])
    }

    fn idx(&self, t: usize, v: usize, row: usize, col: usize) -> usize {
        ((t * self.variables.len() + v) * self.grid.height + row) * self.grid.width + col
    }

    pub fn get(&self, t: usize, v: usize, row: usize, col: usize) -> Option<f64> {
        let x = self.values[self.idx(t, v, row, col)];
        if x.is_nan() {
            None
        } else {
            Some(x)
        }
    }

    pub fn set(&mut self, t: usize, v: usize, row: usize, col: usize, value: Option<f64>) {
        let i = self.idx(t, v, row, col);
        self.values[i] = value.unwrap_or(f64::NAN);
    }

    /// Row-major height x width slice for one (date, variable).
    pub fn slice(&self, t: usize, v: usize) -> &[f64] {
        let start = self.idx(t, v, 0, 0);
        &self.values[start..start + self.grid.len()]
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}
