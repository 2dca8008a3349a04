//! JSON channel descriptions.
//!
//! ```json
//! {"name": "...", "in_dim": 2, "out_dim": 3, "kraus": [[[re, im], ...], ...]}
//! ```
//!
//! Each Kraus operator is a flat row-major list of `[re, im]` pairs of length
//! `out_dim * in_dim`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kraus::QuantumChannel;
use crate::error::{Error, Result};
use crate::qalg::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

pub fn encode_matrix(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn decode_matrix(rows: usize, cols: usize, data: &[[f64; 2]]) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::BadDescription(format!(
            "matrix has {} entries, expected {}x{}",
            data.len(),
            rows,
            cols
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = data[i * cols + j];
        Complex64::new(re, im)
    }))
}

impl From<&QuantumChannel> for ChannelDoc {
    fn from(ch: &QuantumChannel) -> Self {
        Self {
            name: ch.name().to_string(),
            in_dim: ch.in_dim(),
            out_dim: ch.out_dim(),
            kraus: ch.kraus().iter().map(encode_matrix).collect(),
        }
    }
}

impl TryFrom<ChannelDoc> for QuantumChannel {
    type Error = Error;

    fn try_from(doc: ChannelDoc) -> Result<Self> {
        let kraus = doc
            .kraus
            .iter()
            .map(|k| decode_matrix(doc.out_dim, doc.in_dim, k))
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(doc.name, doc.in_dim, doc.out_dim, kraus)
    }
}

impl QuantumChannel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing_channel, erasure_channel};
    use crate::qalg::linalg::max_abs_diff;

    #[test]
    fn round_trip_preserves_kraus() {
        let ch = depolarizing_channel(0.3, 3).unwrap();
        let back = QuantumChannel::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(back.name(), ch.name());
        assert_eq!(back.env_dim(), 9);
        for (a, b) in ch.kraus().iter().zip(back.kraus()) {
            assert!(max_abs_diff(a, b) < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        let ch = erasure_channel(0.5, 2).unwrap();
        let mut doc = ChannelDoc::from(&ch);
        doc.kraus[0].pop();
        assert!(QuantumChannel::try_from(doc).is_err());

        let mut doc = ChannelDoc::from(&ch);
        doc.kraus.remove(0);
        assert!(matches!(QuantumChannel::try_from(doc), Err(Error::NotTracePreserving(_))));

        assert!(QuantumChannel::from_json("{\"name\": 1}").is_err());
    }

    #[test]
    fn row_major_layout() {
        let ch = erasure_channel(0.0, 2).unwrap();
        let doc = ChannelDoc::from(&ch);
        // transfer operator is the 3x2 embedding: entries (0,0) and (1,1)
        assert_eq!(doc.kraus[0][0], [1.0, 0.0]);
        assert_eq!(doc.kraus[0][3], [1.0, 0.0]);
        assert_eq!(doc.kraus[0][1], [0.0, 0.0]);
    }
}
