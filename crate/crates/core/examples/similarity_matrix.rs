//! Builds a language-by-language similarity matrix from sentence embeddings
//! of a parallel corpus and prints it as CSV.

use srcalloc::io::format_matrix_csv;
use srcalloc::rng::Rng;
use srcalloc::similarity::{build_similarity_matrix, cosine_gap, EmbeddingSet};

fn main() -> srcalloc::Result<()> {
    let (n, d) = (40, 16);
    let mut rng = Rng::new(7);
    // One meaning vector per sentence; each language adds its own noise.
    let meaning: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.standard_normal()).collect())
        .collect();
    let mut translate = |lang: &str, noise: f64| {
        let rows = meaning
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| x + noise * rng.standard_normal())
                    .collect()
            })
            .collect();
        EmbeddingSet::from_rows(lang, rows)
    };
    let sets = vec![
        translate("hau", 0.2)?,
        translate("swa", 0.5)?,
        translate("yor", 1.0)?,
        translate("ibo", 2.0)?,
    ];

    println!("gap(hau, swa) = {:.4}", cosine_gap(&sets[0], &sets[1])?);
    println!("gap(hau, ibo) = {:.4}", cosine_gap(&sets[0], &sets[3])?);
    let matrix = build_similarity_matrix(&sets, "synthetic corpus")?;
    print!("{}", format_matrix_csv(&matrix));
    Ok(())
}
