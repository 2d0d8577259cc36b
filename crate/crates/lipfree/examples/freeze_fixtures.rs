//! Recomputes the regression values and writes `fixtures/regression.json`.
//! Existing keys are kept unless recomputed. Pass `--large` to add the
//! ten-level feasibility sweep.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lipfree::core::ratio;
use lipfree::gallery::{run_gallery, GalleryId, GalleryParams};

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/regression.json");
    let mut values: BTreeMap<String, String> = std::fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let mut runs = vec![
        (GalleryId::Ex31Ssd2p, GalleryParams::default()),
        (GalleryId::Ex32, GalleryParams::default()),
    ];
    if std::env::args().any(|a| a == "--large") {
        runs.push((
            GalleryId::Ex31Ssd2p,
            GalleryParams {
                size: Some(10),
                alpha: Some(ratio(1, 20)),
                eps: Some(ratio(1, 20)),
                ..GalleryParams::default()
            },
        ));
    }
    for (id, params) in runs {
        let report = run_gallery(id, &params).expect("gallery run");
        for (k, v) in report.frozen {
            println!("{k} = {v}");
            values.insert(k, v);
        }
    }
    let text = serde_json::to_string_pretty(&values).expect("string map serializes") + "\n";
    std::fs::write(&path, text).expect("write fixtures");
}
