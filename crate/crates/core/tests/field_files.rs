use std::fs;
use std::io::BufWriter;

use mrds::{FieldVertex, GridField, Raster, Window};

fn ramp() -> GridField<f64> {
    let raster = Raster::new(Window::new(-1.0, 3.0, 0.0, 1.0).unwrap(), 7, 3);
    let values = (0..raster.len()).map(|i| i as f64 / (raster.len() - 1) as f64).collect();
    GridField { raster, vertex: FieldVertex::Vertex(0), values }
}

/// Header tokens and the sample bytes of a binary PGM.
fn parse_pgm(bytes: &[u8]) -> (Vec<String>, Vec<String>, &[u8]) {
    let mut pos = 0;
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    while tokens.len() < 4 {
        let end = pos + bytes[pos..].iter().position(|&b| b == b'\n').unwrap();
        let line = std::str::from_utf8(&bytes[pos..end]).unwrap();
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else {
            tokens.extend(line.split_whitespace().map(str::to_string));
        }
        pos = end + 1;
    }
    (tokens, comments, &bytes[pos..])
}

#[test]
fn sixteen_bit_pgm_round_trips_through_disk() {
    let field = ramp();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ramp.pgm");
    let comments = vec!["ramp".to_string(), "two\nlines".to_string()];
    field.write_pgm(BufWriter::new(fs::File::create(&path).unwrap()), 65535, &comments).unwrap();

    let bytes = fs::read(&path).unwrap();
    let (tokens, found, data) = parse_pgm(&bytes);
    assert_eq!(tokens, ["P5", "7", "3", "65535"]);
    assert_eq!(found, ["ramp", "two", "lines"]);
    assert_eq!(data.len(), 2 * field.values.len());
    for (pair, v) in data.chunks(2).zip(&field.values) {
        let q = u16::from_be_bytes([pair[0], pair[1]]) as f64 / 65535.0;
        assert!((q - v).abs() <= 0.5 / 65535.0 + 1e-15);
    }
    assert_eq!(&data[..2], &[0, 0]);
    assert_eq!(&data[data.len() - 2..], &[0xff, 0xff]);
}

#[test]
fn mask_pgm_uses_one_byte_per_sample() {
    let field = ramp().map(|v| if v > 0.5 { 1.0 } else { 0.0 });
    let mut buf = Vec::new();
    field.write_pgm(&mut buf, 255, &[]).unwrap();
    let (tokens, comments, data) = parse_pgm(&buf);
    assert_eq!(tokens[3], "255");
    assert!(comments.is_empty());
    assert_eq!(data.len(), field.values.len());
    assert!(data.iter().all(|&b| b == 0 || b == 255));
}

#[test]
fn out_of_range_values_are_clamped() {
    let mut field = ramp();
    field.values[0] = -0.3;
    field.values[1] = 1.7;
    let mut buf = Vec::new();
    field.write_pgm(&mut buf, 255, &[]).unwrap();
    let (_, _, data) = parse_pgm(&buf);
    assert_eq!((data[0], data[1]), (0, 255));
}

#[test]
fn csv_twin_is_exact() {
    let field = ramp().map(|v| v / 3.0);
    let mut buf = Vec::new();
    field.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 7));
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    assert_eq!(flat, field.values);
}

#[test]
fn first_row_is_the_top_of_the_window() {
    let field = ramp();
    let r = field.raster;
    assert!(r.center(0, 0).im > r.center(0, 2).im);
    assert!(r.center(0, 0).re < r.center(6, 0).re);
    assert_eq!(r.pixel_of(r.center(5, 1)), Some((5, 1)));
}
