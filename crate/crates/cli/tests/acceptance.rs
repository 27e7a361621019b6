//! One test per acceptance criterion; each prints a PASS or FAIL line.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use dadw_core::certificate::{verify_certificate, CertVerdict, DadCertificate};
use dadw_core::corpus;
use dadw_core::dad::{compute_f_set, equivalence_classes, quotient_check, Sampling};
use dadw_core::freeness::check_free_ball;
use dadw_core::group::{Element, GroupDoc, QuotientElement, QuotientKind};
use dadw_core::marker::{find_marker, verify_marker, Marker, MarkerCheck};
use dadw_core::quotient::QuotientSystem;
use dadw_core::space::{BackendDoc, ClopenSet, CosetSet, LevelDoc, PatternSet, SpaceDoc, Tail};
use dadw_core::{GroupSpec, Space};
use oracle::{Aff, LevelModel};
use tempfile::TempDir;

fn criterion(number: u32, title: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {number:>2}: PASS  {title}"),
        Err(panic) => {
            println!("criterion {number:>2}: FAIL  {title}");
            resume_unwind(panic);
        }
    }
}

fn dadw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dadw")).args(args).output().expect("run dadw")
}

fn emit(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let out = dadw(&["corpus", "emit", name, "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

/// `dadw certify` then `dadw verify`; returns the certificate and the time taken.
fn certify_via_cli(dir: &Path, system: &Path, n: u64) -> (DadCertificate, Duration) {
    let cert = dir.join(format!("cert-{n}.json"));
    let start = Instant::now();
    let out = dadw(&[
        "certify",
        "--system",
        system.to_str().unwrap(),
        "--N",
        &n.to_string(),
        "--strict",
        "-o",
        cert.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = dadw(&["verify", "--system", system.to_str().unwrap(), cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "Valid");
    let c = DadCertificate::from_json(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    (c, elapsed)
}

fn load(path: &Path) -> Space {
    Space::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Word length of `p(g)` from Cayley-graph BFS.
fn bfs_length(kind: QuotientKind, g: &Element) -> u64 {
    match kind {
        QuotientKind::Dinf => oracle::dinf_lengths(64)[&Aff::of(g.q)],
        _ => g.q.shift().unsigned_abs(),
    }
}

fn check_bounds(c: &DadCertificate, kind: QuotientKind, marker_m: u64) {
    assert!(c.exact);
    assert_eq!(c.verdict.dad, 1);
    assert_eq!(c.marker.m, marker_m);
    assert_eq!(c.bounds.u0, 3 * c.n);
    assert_eq!(c.bounds.u1, 2 * marker_m + c.n);
    for g in &c.fsets.u0.elements {
        assert!(bfs_length(kind, g) <= 3 * c.n, "{g} outside B_3N");
    }
    for g in &c.fsets.u1.elements {
        assert!(bfs_length(kind, g) <= 2 * marker_m + c.n, "{g} outside B_2M+N");
    }
}

fn coset_model(u: &ClopenSet, extra_levels: usize, dihedral: bool) -> (LevelModel, HashSet<usize>) {
    let ClopenSet::Cosets(CosetSet { level, cosets }) = u else { panic!("coset set expected") };
    let coarse = LevelModel {
        modulus: 1 << level,
        h_order: 1,
    };
    let fine = LevelModel {
        modulus: 1 << (level + extra_levels),
        h_order: 1,
    };
    let set = (0..fine.size(dihedral))
        .filter(|&c| cosets.contains(&fine.project(c, &coarse)))
        .collect();
    (fine, set)
}

fn brute_odometer_fsets(c: &DadCertificate, dihedral: bool) {
    let kind = if dihedral { QuotientKind::Dinf } else { QuotientKind::Z };
    let e_set = oracle::preimage_ball(kind, 1, c.n);
    let steps = (4 * (2 * c.marker.m + c.n)) as usize;
    for (u, f) in [(&c.cover.u0, &c.fsets.u0), (&c.cover.u1, &c.fsets.u1)] {
        let (model, set) = coset_model(u, 2, dihedral);
        let brute = oracle::odometer_fset(&model, &set, &e_set, steps);
        assert_eq!(f.elements.iter().copied().collect::<BTreeSet<_>>(), brute);
    }
}

fn brute_odometer_marker(m: &Marker, kind: QuotientKind, dihedral: bool) {
    let (model, u) = coset_model(&m.u, 0, dihedral);
    let e = Element::new(0, QuotientElement::IDENTITY);
    for g in oracle::preimage_ball(kind, 1, m.disjoint_radius) {
        if g != e {
            assert!(u.iter().all(|&c| !u.contains(&model.act(&g, c))), "{g}");
        }
    }
    let covered: HashSet<usize> = m.cover_set.iter().flat_map(|g| u.iter().map(|&c| model.act(g, c))).collect();
    assert_eq!(covered.len(), model.size(dihedral));
    assert!(m.cover_set.iter().all(|g| bfs_length(kind, g) <= m.m));
}

#[test]
fn criterion_01_dihedral_flagship() {
    criterion(1, "dihedral odometer, N = 1, 2, 3: exact Valid certificates within B_3N and B_2M+N", || {
        let dir = TempDir::new().unwrap();
        let system = emit(dir.path(), "dihedral_odometer");
        let x = load(&system);
        for n in 1..=3 {
            let (c, elapsed) = certify_via_cli(dir.path(), &system, n);
            let marker = find_marker(&x, 5 * n).unwrap();
            check_bounds(&c, QuotientKind::Dinf, marker.m);
            assert!(elapsed < Duration::from_secs(30));
        }
    });
}

#[test]
fn criterion_02_binary_odometer() {
    criterion(2, "binary odometer, N = 1, 2, 3: exact Valid certificates equal to path enumeration", || {
        let dir = TempDir::new().unwrap();
        let system = emit(dir.path(), "binary_odometer");
        let x = load(&system);
        for n in 1..=3 {
            let (c, _) = certify_via_cli(dir.path(), &system, n);
            check_bounds(&c, QuotientKind::Z, find_marker(&x, 5 * n).unwrap().m);
            brute_odometer_fsets(&c, false);
        }
    });
}

#[test]
fn criterion_03_fibonacci() {
    criterion(3, "fibonacci, N = 1: aperiodic marker word, exact certificate, window enumeration", || {
        let dir = TempDir::new().unwrap();
        let system = emit(dir.path(), "fibonacci");
        let (c, _) = certify_via_cli(dir.path(), &system, 1);
        let ClopenSet::Patterns(p) = &c.marker.u else { panic!("pattern marker expected") };
        assert_eq!(p.words.len(), 1);
        let w = p.words[0].as_bytes();
        let period = (1..=w.len()).find(|&q| (q..w.len()).all(|i| w[i] == w[i - q])).unwrap();
        assert!(period > 5);
        check_bounds(&c, QuotientKind::Z, c.marker.m);
        let sample = oracle::iterate(&[('a', "ab"), ('b', "a")], "a", 18);
        let reach = 2 * (2 * c.marker.m as i64 + 1) + p.len as i64;
        for (u, f) in [(&c.cover.u0, &c.fsets.u0), (&c.cover.u1, &c.fsets.u1)] {
            let ClopenSet::Patterns(PatternSet { start, len, words }) = u else { panic!() };
            let words: BTreeSet<String> = words.iter().cloned().collect();
            let brute = oracle::subshift_fset(&sample, *start, *len, &words, 1, reach);
            assert_eq!(f.elements.iter().map(|g| g.q.shift()).collect::<BTreeSet<_>>(), brute);
        }
    });
}

#[test]
fn criterion_04_markers() {
    criterion(4, "every issued marker re-verifies: disjointness over p⁻¹(B_5N) and covering", || {
        for (name, kind, dihedral) in [
            ("dihedral_odometer", QuotientKind::Dinf, true),
            ("binary_odometer", QuotientKind::Z, false),
        ] {
            let x = corpus::build_system(name, &Default::default()).unwrap();
            for n in 1..=3 {
                let m = find_marker(&x, 5 * n).unwrap();
                assert_eq!(verify_marker(&x, &m), MarkerCheck::Verified);
                brute_odometer_marker(&m, kind, dihedral);
            }
        }
        let x = corpus::build_system("fibonacci", &Default::default()).unwrap();
        let m = find_marker(&x, 5).unwrap();
        assert_eq!(verify_marker(&x, &m), MarkerCheck::Verified);
        let ClopenSet::Patterns(p) = &m.u else { panic!() };
        let sample = oracle::iterate(&[('a', "ab"), ('b', "a")], "a", 16);
        let starts: HashSet<i64> = sample
            .match_indices(p.words[0].as_str())
            .map(|(i, _)| i as i64 - p.start)
            .collect();
        let hits: Vec<i64> = starts.iter().copied().collect();
        for a in &hits {
            for b in &hits {
                assert!(a == b || (a - b).abs() > 5);
            }
        }
        let lo = *hits.iter().min().unwrap() + 20;
        let hi = *hits.iter().max().unwrap() - 20;
        for origin in lo..hi {
            assert!(m.cover_set.iter().any(|g| starts.contains(&(origin - g.q.shift()))));
        }
    });
}

#[test]
fn criterion_05_isometry() {
    criterion(5, "d(g, h) = |ι(g) − ι(h)| on B_10 of D∞ (441 pairs, BFS distances)", || {
        let g = GroupSpec::trivial(QuotientKind::Dinf);
        let lengths = oracle::dinf_lengths(30);
        let ball: Vec<Aff> = lengths.iter().filter(|(_, d)| **d <= 10).map(|(a, _)| *a).collect();
        let mut pairs = 0;
        for a in &ball {
            for b in &ball {
                assert_eq!(lengths[&a.then(b.inv())], g.iota(a.to_q()).abs_diff(g.iota(b.to_q())));
                pairs += 1;
            }
        }
        assert_eq!(pairs, 441);
    });
}

#[test]
fn criterion_06_freeness() {
    criterion(6, "check_free_ball(5) on both odometers; periodic_3 fails at 3 with exit code 1", || {
        for name in ["binary_odometer", "dihedral_odometer"] {
            let x = corpus::build_system(name, &Default::default()).unwrap();
            assert_eq!(check_free_ball(&x, 5).unwrap().certificates.len(), 10);
        }
        let dir = TempDir::new().unwrap();
        let system = emit(dir.path(), "periodic_3");
        let out = dadw(&["freeness", "--system", system.to_str().unwrap(), "--ball", "5"]);
        assert_eq!(out.status.code(), Some(1));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("q=(+1,3)") && err.contains("fixes"), "{err}");
    });
}

#[test]
fn criterion_07_quotient() {
    criterion(7, "z_cross_z2_product with K = Z/2, N = 1: containment, both sides enumerated", || {
        let x = corpus::build_system("z_cross_z2_product", &Default::default()).unwrap();
        let k = [
            Element::new(0, QuotientElement::IDENTITY),
            Element::new(1, QuotientElement::IDENTITY),
        ];
        let report = quotient_check(&x, &k, 1, 0).unwrap();
        assert!(report.contained());
        let q = QuotientSystem::new(&x, &k).unwrap();
        let m = find_marker(q.target(), 5).unwrap();
        let cover = dadw_core::dad::build_cover(q.target(), 1, &m).unwrap();
        let e_set = oracle::preimage_ball(QuotientKind::Z, 2, 1);
        let q_e: Vec<Element> = oracle::preimage_ball(QuotientKind::Z, 1, 1);
        for (side, u) in report.sides.iter().zip([&cover.u0, &cover.u1]) {
            let (base, base_set) = coset_model(u, 1, false);
            let product = LevelModel {
                modulus: base.modulus,
                h_order: 2,
            };
            let pulled: HashSet<usize> = base_set.iter().flat_map(|&c| [2 * c, 2 * c + 1]).collect();
            let lhs = oracle::odometer_fset(&product, &pulled, &e_set, 40);
            let rhs = oracle::odometer_fset(&base, &base_set, &q_e, 40);
            assert_eq!(side.lhs.iter().copied().collect::<BTreeSet<_>>(), lhs);
            assert_eq!(side.rhs.iter().copied().collect::<BTreeSet<_>>(), rhs);
            assert!(lhs.iter().all(|g| rhs.contains(&Element::new(0, g.q))));
        }
    });
}

#[test]
fn criterion_08_tamper_matrix() {
    criterion(8, "tampered certificates are Invalid; untampered ones round-trip bit-exactly", || {
        for name in ["dihedral_odometer", "binary_odometer", "fibonacci"] {
            let x = corpus::build_system(name, &Default::default()).unwrap();
            let c = dadw_core::dad::certify_dad_one(&x, 1, Default::default()).unwrap();
            let text = c.to_json();
            assert_eq!(DadCertificate::from_json(&text).unwrap().to_json(), text);
            assert_eq!(verify_certificate(&x, &c), CertVerdict::Valid);

            let mut drop = c.clone();
            drop.fsets.u1.elements.remove(1);
            drop.fsets.u1.attain.remove(1);
            let mut grow = c.clone();
            grow.marker.u = match &c.marker.u {
                ClopenSet::Cosets(s) => {
                    let extra = (0..).find(|k| !s.cosets.contains(k)).unwrap();
                    let mut cosets = s.cosets.clone();
                    cosets.push(extra);
                    cosets.sort();
                    ClopenSet::Cosets(CosetSet { level: s.level, cosets })
                }
                ClopenSet::Patterns(p) => {
                    let lang = x.subshift().unwrap().language(p.len).unwrap();
                    let mut words = p.words.clone();
                    words.push(lang.iter().find(|w| !p.words.contains(w)).unwrap().clone());
                    words.sort();
                    ClopenSet::Patterns(PatternSet { words, ..p.clone() })
                }
            };
            let mut shrink = c.clone();
            shrink.marker.m -= 1;
            let mut flip = c.clone();
            flip.verdict.dad = 0;
            for (tampered, obligation) in [(drop, "closure"), (grow, "disjointness"), (shrink, "covering"), (flip, "lower-bound")] {
                assert_eq!(verify_certificate(&x, &tampered).obligation(), Some(obligation), "{name}");
            }
        }
    });
}

#[test]
fn criterion_09_class_bound() {
    criterion(9, "classes of ~(U_i, E) on levels up to 2^6 cosets are no larger than |F(U_i, E)|", || {
        for (name, dihedral, top) in [("binary_odometer", false, 6), ("dihedral_odometer", true, 5)] {
            let x = corpus::build_system(name, &Default::default()).unwrap();
            let m = find_marker(&x, 5).unwrap();
            let cover = dadw_core::dad::build_cover(&x, 1, &m).unwrap();
            let kind = x.group().kind();
            let e_set = oracle::preimage_ball(kind, 1, 1);
            for u in [&cover.u0, &cover.u1] {
                let ClopenSet::Cosets(c) = u else { panic!() };
                let bound = compute_f_set(&x, u, &e_set, 2 * m.m + 1).unwrap().elements.len();
                for level in c.level..=top {
                    let (model, set) = coset_model(u, level - c.level, dihedral);
                    let sizes = oracle::odometer_classes(&model, &set, &e_set);
                    assert!(sizes.iter().all(|&s| s <= bound));
                    let report = equivalence_classes(&x, u, &e_set, &Sampling::Level(level), 2 * m.m + 1).unwrap();
                    assert_eq!(report.max_class_size, sizes.into_iter().max().unwrap());
                    let single = equivalence_classes(&x, u, &[], &Sampling::Level(level), 0).unwrap();
                    assert_eq!(single.max_class_size, 1);
                }
            }
        }
    });
}

#[test]
fn criterion_10_lower_bound() {
    criterion(10, "certificates record dad >= 1; a finite group is rejected as an input error", || {
        let dir = TempDir::new().unwrap();
        for name in ["dihedral_odometer", "binary_odometer", "fibonacci"] {
            let system = emit(dir.path(), name);
            let (c, _) = certify_via_cli(dir.path(), &system, 1);
            assert_eq!(c.lower_bound, "quotient infinite => not locally finite");
        }
        let doc = SpaceDoc {
            group: GroupDoc::trivial(QuotientKind::Finite),
            backend: BackendDoc::Odometer {
                levels: vec![LevelDoc::Modulus(1)],
                tail: Tail::Stable,
            },
        };
        let finite = Space::from_doc(doc).unwrap();
        assert!(matches!(
            dadw_core::dad::certify_dad_one(&finite, 1, Default::default()),
            Err(dadw_core::dad::DadError::Input(_))
        ));
        let path = dir.path().join("finite.json");
        std::fs::write(&path, finite.to_json()).unwrap();
        let out = dadw(&["certify", "--system", path.to_str().unwrap(), "--N", "1"]);
        assert_eq!(out.status.code(), Some(3));
    });
}
