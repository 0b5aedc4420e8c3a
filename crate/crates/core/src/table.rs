//! Fixed-width plain-text tables and half-up decimal rendering.

/// Formats `x` with `decimals` digits, rounding halves away from zero.
///
/// Binary floats rarely hold an exact half, so values within a relative
/// 1e-9 of a half are treated as the half.
pub fn fmt_half_up(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let scale = 10f64.powi(decimals as i32);
    let scaled = x.abs() * scale;
    let nudged = scaled + 0.5 + (scaled * 1e-9).max(1e-9);
    let rounded = nudged.floor().copysign(x) / scale;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// A table whose column widths come from the header and a minimum width,
/// so the layout does not depend on the data.
#[derive(Debug, Clone)]
pub struct TextTable {
    columns: Vec<(String, usize, Align)>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new() -> Self {
        TextTable {
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn column(mut self, header: &str, min_width: usize, align: Align) -> Self {
        let width = min_width.max(header.chars().count());
        self.columns.push((header.to_string(), width, align));
        self
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let headers: Vec<String> = self.columns.iter().map(|c| c.0.clone()).collect();
        self.render_line(&mut out, &headers);
        let total: usize = self.columns.iter().map(|c| c.1).sum::<usize>() + 2 * self.columns.len().saturating_sub(1);
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for r in &self.rows {
            self.render_line(&mut out, r);
        }
        out
    }

    fn render_line(&self, out: &mut String, cells: &[String]) {
        let mut line = String::new();
        for (i, (_, width, align)) in self.columns.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let cell = cells.get(i).map(String::as_str).unwrap_or("");
            let pad = width.saturating_sub(cell.chars().count());
            match align {
                Align::Left => {
                    line.push_str(cell);
                    line.push_str(&" ".repeat(pad));
                }
                Align::Right => {
                    line.push_str(&" ".repeat(pad));
                    line.push_str(cell);
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

impl Default for TextTable {
    fn default() -> Self {
        Self::new()
    }
}
