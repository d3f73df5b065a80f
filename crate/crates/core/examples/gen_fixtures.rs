//! Prints rank-3 mirror pairs from the test corpus as fixture JSON.
//!
//! `cargo run -p multimirror --example gen_fixtures -- [count] [outdir]`
//! writes `rank3-<i>.json` files when `outdir` is given.

#[path = "../tests/common/corpus.rs"]
mod corpus;

use std::path::PathBuf;

use multimirror::{CharacterTable, MirrorPair, WStructure};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(3, |s| s.parse().expect("count"));
    let outdir = args.next().map(PathBuf::from);

    let entries = corpus::corpus(6);
    let mut picked = Vec::new();
    let mut seen_shapes = Vec::new();
    // Prefer distinct (parts, blocks) shapes, then take the rest in order.
    let pairs: Vec<_> = corpus::mirror_pairs(&entries)
        .into_iter()
        .filter(|(_, mp)| mp.rank() == 3)
        .collect();
    for (name, mp) in &pairs {
        let shape = (mp.len(), cells(mp).beta());
        if !seen_shapes.contains(&shape) {
            seen_shapes.push(shape);
            picked.push((name.clone(), mp.clone()));
        }
    }
    for (name, mp) in &pairs {
        if picked.len() >= count {
            break;
        }
        if !picked.iter().any(|(n, _)| n == name) {
            picked.push((name.clone(), mp.clone()));
        }
    }
    picked.truncate(count);

    for (i, (name, mp)) in picked.iter().enumerate() {
        let w = cells(mp);
        let text = fixture_json(mp);
        eprintln!("{name}: r={} beta={} cells={:?}", mp.len(), w.beta(), w.cell_sizes());
        match &outdir {
            Some(dir) => std::fs::write(dir.join(format!("rank3-{}.json", i + 1)), text).expect("write"),
            None => print!("{text}"),
        }
    }
}

fn cells(mp: &MirrorPair) -> WStructure {
    WStructure::build(&CharacterTable::build_xi(mp).expect("table")).expect("cells")
}

fn compact<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("json")
}

// One part per line keeps the files readable.
fn fixture_json(mp: &MirrorPair) -> String {
    let parts: Vec<String> = mp
        .nabla1()
        .parts()
        .iter()
        .map(|p| format!("    {}", compact(p)))
        .collect();
    format!(
        "{{\n  \"rank\": {},\n  \"nabla\": [\n{}\n  ],\n  \"translations\": {}\n}}\n",
        mp.rank(),
        parts.join(",\n"),
        compact(mp.translations()),
    )
}
