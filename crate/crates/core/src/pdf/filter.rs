use std::io::Read;

use flate2::read::ZlibDecoder;

use super::object::{Dictionary, Object, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum FilterError {
    Unsupported(String),
    Corrupt(String),
}

fn filters(dict: &Dictionary) -> Vec<(Vec<u8>, Option<&Dictionary>)> {
    let parms: Vec<Option<&Dictionary>> = match dict.get("DecodeParms") {
        Some(Object::Dictionary(d)) => vec![Some(d)],
        Some(Object::Array(items)) => items.iter().map(Object::as_dict).collect(),
        _ => Vec::new(),
    };
    let names: Vec<Vec<u8>> = match dict.get("Filter") {
        Some(Object::Name(n)) => vec![n.clone()],
        Some(Object::Array(items)) => items
            .iter()
            .filter_map(|o| o.as_name().map(<[u8]>::to_vec))
            .collect(),
        _ => Vec::new(),
    };
    names
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, parms.get(i).copied().flatten()))
        .collect()
}

/// Decoded stream contents. Only FlateDecode (with optional PNG predictors)
/// is supported.
pub(crate) fn decode(stream: &Stream) -> Result<Vec<u8>, FilterError> {
    let mut data = stream.data.clone();
    for (name, parms) in filters(&stream.dict) {
        data = match name.as_slice() {
            b"FlateDecode" | b"Fl" => {
                let mut out = Vec::new();
                ZlibDecoder::new(data.as_slice())
                    .read_to_end(&mut out)
                    .map_err(|e| FilterError::Corrupt(e.to_string()))?;
                match parms {
                    Some(p) => unpredict(out, p)?,
                    None => out,
                }
            }
            other => {
                return Err(FilterError::Unsupported(
                    String::from_utf8_lossy(other).into_owned(),
                ))
            }
        };
    }
    Ok(data)
}

fn unpredict(data: Vec<u8>, parms: &Dictionary) -> Result<Vec<u8>, FilterError> {
    let int = |key: &str, default: i64| parms.get(key).and_then(Object::as_integer).unwrap_or(default);
    let predictor = int("Predictor", 1);
    if predictor == 1 {
        return Ok(data);
    }
    if predictor < 10 {
        return Err(FilterError::Unsupported(format!("predictor {predictor}")));
    }
    let colors = int("Colors", 1).max(1) as usize;
    let bits = int("BitsPerComponent", 8).max(1) as usize;
    let columns = int("Columns", 1).max(1) as usize;
    let bpp = (colors * bits).div_ceil(8).max(1);
    let row_len = (colors * bits * columns).div_ceil(8);

    let mut out = Vec::with_capacity(data.len());
    let mut prev = vec![0u8; row_len];
    for chunk in data.chunks(row_len + 1) {
        if chunk.len() < row_len + 1 {
            return Err(FilterError::Corrupt("truncated predictor row".into()));
        }
        let kind = chunk[0];
        let mut row = chunk[1..].to_vec();
        for i in 0..row_len {
            let left = if i >= bpp { row[i - bpp] } else { 0 };
            let up = prev[i];
            let up_left = if i >= bpp { prev[i - bpp] } else { 0 };
            let add = match kind {
                0 => 0,
                1 => left,
                2 => up,
                3 => ((u16::from(left) + u16::from(up)) / 2) as u8,
                4 => paeth(left, up, up_left),
                k => return Err(FilterError::Corrupt(format!("PNG filter type {k}"))),
            };
            row[i] = row[i].wrapping_add(add);
        }
        out.extend_from_slice(&row);
        prev = row;
    }
    Ok(out)
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = i16::from(a) + i16::from(b) - i16::from(c);
    let (pa, pb, pc) = ((p - i16::from(a)).abs(), (p - i16::from(b)).abs(), (p - i16::from(c)).abs());
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::ZlibEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn deflate(data: &[u8]) -> Vec<u8> {
        let mut e = ZlibEncoder::new(Vec::new(), Compression::default());
        e.write_all(data).unwrap();
        e.finish().unwrap()
    }

    #[test]
    fn png_up_rows() {
        // Two rows of 3 columns: [1,2,3] then [4,6,8] encoded with Up.
        let encoded = deflate(&[2, 1, 2, 3, 2, 3, 4, 5]);
        let mut dict = Dictionary::new();
        dict.set("Filter", Object::name("FlateDecode"));
        let mut parms = Dictionary::new();
        parms.set("Predictor", Object::Integer(12));
        parms.set("Columns", Object::Integer(3));
        dict.set("DecodeParms", Object::Dictionary(parms));
        let out = decode(&Stream { dict, data: encoded }).unwrap();
        assert_eq!(out, [1, 2, 3, 4, 6, 8]);
    }

    #[test]
    fn unsupported_filter() {
        let mut dict = Dictionary::new();
        dict.set("Filter", Object::name("DCTDecode"));
        assert!(matches!(
            decode(&Stream { dict, data: vec![] }),
            Err(FilterError::Unsupported(_))
        ));
    }

    #[test]
    fn paeth_matches_reference() {
        assert_eq!(paeth(10, 20, 10), 20);
        assert_eq!(paeth(20, 10, 10), 20);
        assert_eq!(paeth(5, 5, 5), 5);
    }
}
