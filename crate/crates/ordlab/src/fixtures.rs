//! Embedded demonstration inputs. Anywhere the CLI takes an input path,
//! `fixture:<name>` resolves to one of these instead of a file on disk —
//! handy for demos, replay commands, and tests that should not depend on
//! the working directory.

use std::io;

/// Three-level tree fragment: levels `0`, `w^w`, `w^w*2` with three
/// offsets each and straight chains (offset k sits above offset k).
pub const BRAID_TREE: &str = "\
# three-level tree fragment, straight chains
node 0       level 0      offset 0 parent root
node 1       level 0      offset 1 parent root
node 2       level 0      offset 2 parent root
node w^w     level w^w    offset 0 parent 0
node w^w+1   level w^w    offset 1 parent 1
node w^w+2   level w^w    offset 2 parent 2
node w^w*2   level w^w*2  offset 0 parent w^w
node w^w*2+1 level w^w*2  offset 1 parent w^w+1
node w^w*2+2 level w^w*2  offset 2 parent w^w+2
";

/// [`BRAID_TREE`] plus a second parent for the top-left node — the chain
/// through `w^w*2` then meets the middle level twice, so chain uniqueness
/// (and with it the G4 witness) must fail.
pub const BRAID_TREE_MUTANT: &str = "\
# three-level tree fragment with a two-parent defect
node 0       level 0      offset 0 parent root
node 1       level 0      offset 1 parent root
node 2       level 0      offset 2 parent root
node w^w     level w^w    offset 0 parent 0
node w^w+1   level w^w    offset 1 parent 1
node w^w+2   level w^w    offset 2 parent 2
node w^w*2   level w^w*2  offset 0 parent w^w
node w^w*2+1 level w^w*2  offset 1 parent w^w+1
node w^w*2+2 level w^w*2  offset 2 parent w^w+2
node w^w*2   level w^w*2  offset 0 parent w^w+1
";

/// Pre-gap over residues mod 4: the a-chain grows into `{0,1 (mod 4)}`,
/// the b-chain into `{2,3 (mod 4)}`, with one finite perturbation (the
/// element 2 moves sides at stage 2).
pub const MOD4_PREGAP: &str = "\
# mod-4 pre-gap, three stages
set a0 = (mod 4 0)
set a1 = (mod 4 0 1)
set a2 = (union (mod 4 0 1) (fin 2))
set b0 = (mod 4 3)
set b1 = (mod 4 2 3)
set b2 = (diff (mod 4 2 3) (fin 2))
index 0 a=a0 b=b0
index 1 a=a1 b=b1
index 2 a=a2 b=b2
cert a 0 1 bound=0
cert a 0 2 bound=0
cert a 1 2 bound=0
cert b 0 1 bound=0
cert b 0 2 bound=0
cert b 1 2 bound=3
";

/// Three-stage tower: evens, then two residue-progression extensions, with
/// tight certificates and progression witnesses.
pub const TOWER_DEMO: &str = "\
# tower fragment over indices 0, 1, w
set a0 = (mod 2 0)
set a1 = (union (mod 2 0) (ap 1 4))
set aw = (union (union (mod 2 0) (ap 1 4)) (ap 3 8))
index 0 set=a0
index 1 set=a1
index w set=aw
cert 0 1 bound=0 witness=1+4k
cert 0 2 bound=0 witness=1+4k
cert 1 2 bound=0 witness=3+8k
";

/// A small mixed universe of ordinals below `w^w`, one per line.
pub const UNIVERSE_SMALL: &str = "\
# sample universe below w^w
0
1
2
3
5
w
w+1
w*2
w*2+1
w^2
w^2+w
w^2*3+w*2+1
w^3
w^3+w^2*2+5
w^5+w^2
";

const FIXTURES: &[(&str, &str)] = &[
    ("braid-tree", BRAID_TREE),
    ("braid-tree-mutant", BRAID_TREE_MUTANT),
    ("mod4-pregap", MOD4_PREGAP),
    ("tower-demo", TOWER_DEMO),
    ("universe-small", UNIVERSE_SMALL),
];

/// Embedded fixture text by name.
pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

/// Reads an input argument: `fixture:<name>` resolves to embedded text,
/// anything else is a path on disk.
pub fn resolve_input(path: &str) -> io::Result<String> {
    match path.strip_prefix("fixture:") {
        Some(name) => fixture(name).map(str::to_string).ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::NotFound,
                format!("unknown fixture {name:?} (available: {})", fixture_names().join(", ")),
            )
        }),
        None => std::fs::read_to_string(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ord::Ordinal;
    use crate::report::Status;
    use crate::sets::{parse_gap_manifest, parse_tower_manifest, validate_pregap, validate_tower, SetsLimits};
    use crate::tree::{verify_tree_matrix, ExplicitTree};

    #[test]
    fn braid_tree_fixture_is_sound() {
        let t = ExplicitTree::parse(BRAID_TREE).unwrap();
        assert_eq!(t.len(), 9);
        let levels = t.levels();
        let report = verify_tree_matrix(&t, &levels, 2);
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn braid_mutant_fixture_breaks_uniqueness() {
        let t = ExplicitTree::parse(BRAID_TREE_MUTANT).unwrap();
        let levels = t.levels();
        let report = verify_tree_matrix(&t, &levels, 2);
        assert_eq!(report.status_of("tree.order"), Some(Status::Fail));
        assert_eq!(report.status_of("tree.G4"), Some(Status::Fail));
    }

    #[test]
    fn mod4_pregap_fixture_is_sound() {
        let g = parse_gap_manifest(MOD4_PREGAP).unwrap();
        assert_eq!(g.len(), 3);
        assert!(validate_pregap(&g, &SetsLimits::default(), "ordlab gap verify fixture:mod4-pregap")
            .all_pass());
    }

    #[test]
    fn tower_demo_fixture_is_sound() {
        let t = parse_tower_manifest(TOWER_DEMO).unwrap();
        assert_eq!(t.len(), 3);
        let report =
            validate_tower(&t, &SetsLimits::default(), "ordlab tower verify fixture:tower-demo");
        assert!(report.all_pass(), "{}", report.to_text());
    }

    #[test]
    fn universe_fixture_parses_below_w_to_the_w(){
        let bound = Ordinal::omega_pow(Ordinal::omega());
        let ords: Vec<Ordinal> = UNIVERSE_SMALL
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| Ordinal::parse(l).expect(l))
            .collect();
        assert_eq!(ords.len(), 15);
        assert!(ords.iter().all(|o| o < &bound));
    }

    #[test]
    fn resolver_round_trips() {
        assert!(resolve_input("fixture:braid-tree").unwrap().contains("node w^w*2"));
        assert!(resolve_input("fixture:nope").is_err());
        assert_eq!(fixture_names().len(), 5);
    }
}
