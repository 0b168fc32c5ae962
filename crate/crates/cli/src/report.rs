//! Report tree shared by the JSON and CSV writers.

use std::io::Write;

use serde_json::{json, Map, Value};
use stokes_core::{CMat, C64};

#[derive(Debug, Clone)]
pub enum Item {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Complex(C64),
    Reals(Vec<f64>),
    Ints(Vec<i64>),
    Complexes(Vec<C64>),
    Matrix(CMat),
    RealMatrix(nalgebra::DMatrix<f64>),
    Raw(Value),
    List(Vec<Item>),
    Section(Section),
}

/// Ordered list of named items.
#[derive(Debug, Clone, Default)]
pub struct Section(pub Vec<(String, Item)>);

impl Section {
    pub fn push(&mut self, key: &str, item: Item) {
        self.0.push((key.to_string(), item));
    }
}

fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

impl Item {
    pub fn to_json(&self) -> Value {
        match self {
            Item::Real(x) => json!(x),
            Item::Int(i) => json!(i),
            Item::Bool(b) => json!(b),
            Item::Text(s) => json!(s),
            Item::Complex(z) => cx(*z),
            Item::Reals(v) => json!(v),
            Item::Ints(v) => json!(v),
            Item::Complexes(v) => Value::Array(v.iter().map(|&z| cx(z)).collect()),
            Item::Matrix(m) => Value::Array(
                (0..m.nrows())
                    .map(|i| Value::Array((0..m.ncols()).map(|j| cx(m[(i, j)])).collect()))
                    .collect(),
            ),
            Item::RealMatrix(m) => Value::Array(
                (0..m.nrows())
                    .map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()))
                    .collect(),
            ),
            Item::Raw(v) => v.clone(),
            Item::List(items) => Value::Array(items.iter().map(Item::to_json).collect()),
            Item::Section(s) => s.to_json(),
        }
    }
}

impl Section {
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v) in &self.0 {
            map.insert(k.clone(), v.to_json());
        }
        Value::Object(map)
    }

    /// One record per scalar: `path,row,col,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "row", "col", "re", "im"])?;
        self.csv_rows(&mut w, "")?;
        w.flush()?;
        Ok(())
    }

    fn csv_rows<W: Write>(&self, w: &mut csv::Writer<W>, prefix: &str) -> csv::Result<()> {
        for (k, v) in &self.0 {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            item_rows(v, w, &path)?;
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    // shortest representation that reads back to the same f64
    format!("{x:?}")
}

fn item_rows<W: Write>(item: &Item, w: &mut csv::Writer<W>, path: &str) -> csv::Result<()> {
    let e = String::new();
    match item {
        Item::Real(x) => w.write_record([path, "", "", &num(*x), ""]),
        Item::Int(i) => w.write_record([path, "", "", &i.to_string(), ""]),
        Item::Bool(b) => w.write_record([path, "", "", &b.to_string(), ""]),
        Item::Text(s) => w.write_record([path, "", "", s, ""]),
        Item::Complex(z) => w.write_record([path, "", "", &num(z.re), &num(z.im)]),
        Item::Reals(v) => {
            for (i, x) in v.iter().enumerate() {
                w.write_record([path, &i.to_string(), &e, &num(*x), &e])?;
            }
            Ok(())
        }
        Item::Ints(v) => {
            for (i, x) in v.iter().enumerate() {
                w.write_record([path, &i.to_string(), &e, &x.to_string(), &e])?;
            }
            Ok(())
        }
        Item::Complexes(v) => {
            for (i, z) in v.iter().enumerate() {
                w.write_record([path, &i.to_string(), &e, &num(z.re), &num(z.im)])?;
            }
            Ok(())
        }
        Item::Matrix(m) => {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    w.write_record([path, &i.to_string(), &j.to_string(), &num(z.re), &num(z.im)])?;
                }
            }
            Ok(())
        }
        Item::RealMatrix(m) => {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    w.write_record([path, &i.to_string(), &j.to_string(), &num(m[(i, j)]), &e])?;
                }
            }
            Ok(())
        }
        Item::Raw(v) => w.write_record([path, "", "", &v.to_string(), ""]),
        Item::List(items) => {
            for (i, it) in items.iter().enumerate() {
                item_rows(it, w, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        Item::Section(s) => s.csv_rows(w, path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_row_major() {
        let m = CMat::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64));
        let mut s = Section::default();
        s.push("C", Item::Matrix(m));
        let v = s.to_json();
        assert_eq!(v["C"][1][0], json!([1.0, 0.0]));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("C,1,0,1.0,0.0"));
        assert_eq!(text.lines().count(), 5);
    }
}
