//! Graph file formats.
//!
//! JSON: `{"vertices":[{"id":0,"measure":1.0},…],"edges":[[0,1],…]}` with ids
//! `0..n`. CSV: an edge list (`u,v` rows) plus an optional measure file
//! (`id,measure` rows); header lines are skipped.

use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::MeasuredGraph;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: usize,
    pub measure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<[usize; 2]>,
}

impl GraphDocument {
    /// Measures indexed by id, after checking the ids are exactly `0..n`.
    pub fn measures(&self) -> Result<Vec<f64>> {
        let n = self.vertices.len();
        let mut measure = vec![f64::NAN; n];
        for v in &self.vertices {
            if v.id >= n {
                return Err(Error::input(format!("vertex id {} out of range 0..{n}", v.id)));
            }
            if !measure[v.id].is_nan() {
                return Err(Error::input(format!("duplicate vertex id {}", v.id)));
            }
            measure[v.id] = v.measure;
        }
        Ok(measure)
    }

    pub fn labels(&self) -> Option<Vec<String>> {
        if self.vertices.iter().all(|v| v.label.is_none()) {
            return None;
        }
        let mut labels = vec![String::new(); self.vertices.len()];
        for v in &self.vertices {
            if let (Some(l), Some(slot)) = (&v.label, labels.get_mut(v.id)) {
                slot.clone_from(l);
            }
        }
        Some(labels)
    }

    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e[0], e[1])).collect()
    }

    pub fn to_graph(&self) -> Result<MeasuredGraph> {
        let graph = MeasuredGraph::new(self.measures()?, &self.edge_pairs())?;
        match self.labels() {
            Some(labels) => graph.with_labels(labels),
            None => Ok(graph),
        }
    }

    pub fn from_graph(graph: &MeasuredGraph) -> Self {
        let vertices = (0..graph.vertex_count())
            .map(|v| VertexEntry { id: v, measure: graph.measure(v), label: graph.label(v).map(str::to_owned) })
            .collect();
        let edges = graph.edges().map(|(a, b)| [a, b]).collect();
        GraphDocument { vertices, edges }
    }
}

pub fn read_graph_json<R: Read>(reader: R) -> Result<MeasuredGraph> {
    let doc: GraphDocument = serde_json::from_reader(reader)?;
    doc.to_graph()
}

pub fn graph_to_json(graph: &MeasuredGraph) -> Result<String> {
    Ok(serde_json::to_string(&GraphDocument::from_graph(graph))?)
}

fn numeric_rows<R: Read>(reader: R) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::input(format!("CSV row {} needs two columns", i + 1)));
        }
        if i == 0 && record[0].parse::<f64>().is_err() {
            continue;
        }
        rows.push((record[0].to_owned(), record[1].to_owned()));
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::input(format!("cannot parse {s:?}: {e}")))
}

/// Reads an edge-list CSV and an optional measure CSV. Without a measure
/// file the counting measure is used on vertices `0..=max id`.
pub fn read_graph_csv<R: Read, M: Read>(edges: R, measure: Option<M>) -> Result<MeasuredGraph> {
    let edge_list: Vec<(usize, usize)> =
        numeric_rows(edges)?.into_iter().map(|(a, b)| Ok((parse(&a)?, parse(&b)?))).collect::<Result<_>>()?;
    let measure = match measure {
        Some(m) => {
            let rows = numeric_rows(m)?;
            let entries = rows
                .into_iter()
                .map(|(id, m)| Ok(super::io::VertexEntry { id: parse(&id)?, measure: parse(&m)?, label: None }))
                .collect::<Result<Vec<_>>>()?;
            GraphDocument { vertices: entries, edges: Vec::new() }.measures()?
        }
        None => {
            let n = edge_list.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(1);
            vec![1.0; n]
        }
    };
    MeasuredGraph::new(measure, &edge_list)
}

/// Edge-list CSV and measure CSV, each with a header line.
pub fn graph_to_csv(graph: &MeasuredGraph) -> (String, String) {
    let mut edges = String::from("u,v\n");
    for (a, b) in graph.edges() {
        let _ = writeln!(edges, "{a},{b}");
    }
    let mut measure = String::from("id,measure\n");
    for v in 0..graph.vertex_count() {
        let _ = writeln!(measure, "{v},{}", graph.measure(v));
    }
    (edges, measure)
}
