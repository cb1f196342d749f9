//! Writes the built-in example models as text files.
//!
//! `cargo run -p pwlnn --example catalog -- <dir>`

use std::path::PathBuf;

use pwlnn::catalog;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let models = [
        ("two_piece_3d.txt", catalog::two_piece_3d().to_text()),
        ("three_piece_1d.txt", catalog::three_piece_1d().to_text()),
        ("three_piece_cplr.txt", catalog::three_piece_cplr().to_text()),
        ("ridge.txt", catalog::ridge_conventional().to_text()),
        ("ridge_nested.txt", catalog::ridge_nested().to_text()),
        ("ridge_ghh.txt", catalog::ridge_ghh().to_text()),
        ("five_piece.txt", catalog::five_piece().to_text()),
        ("five_piece_lattice.txt", catalog::five_piece_lattice().to_text()),
    ];
    for (name, text) in models {
        std::fs::write(dir.join(name), text)?;
        println!("{}", dir.join(name).display());
    }
    Ok(())
}
