//! Print a built-in derivation (refl, symm or trans) in the derivation
//! file format, suitable for `compath check`.

use compath::deriv::render_derivation;
use compath::kernel::builtin_constructions;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "refl".into());
    let builtins = builtin_constructions();
    match builtins.get(name.as_str()) {
        Some(d) => print!("{}", render_derivation(d)),
        None => {
            eprintln!("unknown construction {name}; available: refl, symm, trans");
            std::process::exit(2);
        }
    }
}
