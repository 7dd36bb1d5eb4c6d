use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Ndjson,
}

/// A rectangular report that renders as an aligned table or as CSV.
#[derive(Debug, Default)]
pub struct Rows {
    pub title: Option<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Rows {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            title: None,
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn table(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_owned() + "\n"
        };
        let mut out = String::new();
        if let Some(t) = &self.title {
            out += t;
            out.push('\n');
        }
        out += &line(&self.headers);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out += &line(&rule);
        for row in &self.rows {
            out += &line(row);
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = self.headers.join(",") + "\n";
        for row in &self.rows {
            out += &row.join(",");
            out.push('\n');
        }
        out
    }
}

pub fn ndjson(records: &[Value]) -> String {
    records.iter().map(|r| r.to_string() + "\n").collect()
}

/// Renders `sections` as tables separated by blank lines, or as one CSV
/// stream, or emits `records` as ndjson.
pub fn render(format: Format, sections: &[Rows], records: &[Value]) -> String {
    match format {
        Format::Table => sections
            .iter()
            .map(Rows::table)
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Csv => sections.iter().map(Rows::csv).collect(),
        Format::Ndjson => ndjson(records),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_align() {
        let mut r = Rows::new(["n", "value"]);
        r.push(["1", "0/1"]);
        r.push(["10", "1/2"]);
        assert_eq!(r.table(), "n   value\n--  -----\n1   0/1\n10  1/2\n");
        assert_eq!(r.csv(), "n,value\n1,0/1\n10,1/2\n");
    }
}
