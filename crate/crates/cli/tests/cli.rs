use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_moebius"))
}

fn params(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("params")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn moebius")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    stdout(&out)
}

fn result<'a>(summary: &'a str, key: &str) -> Option<&'a str> {
    let results = summary.split("[results]\n").nth(1)?;
    results
        .lines()
        .take_while(|l| !l.starts_with("[[record]]"))
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

fn header(dir: &Path, file: &str) -> String {
    let text = fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
    text.lines().next().unwrap_or_default().to_string()
}

/// Command line, expected CSV headers, expected result keys.
type Schema = (
    Vec<String>,
    Vec<(&'static str, &'static str)>,
    Vec<&'static str>,
);

fn schemas() -> Vec<Schema> {
    let chacon = params("chacon.cfg").display().to_string();
    let growing = params("growing.cfg").display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        (
            s(&["sieve", "--limit", "20000", "--grid", "1024"]),
            vec![("mertens.csv", "N,mertens"), ("twisted.csv", "N,supremum,argmax_t")],
            vec!["mertens[10000]", "squarefree_density", "mertens_ratio"],
        ),
        (
            s(&["words", "--params", &chacon, "--stages", "4", "--dump-words"]),
            vec![
                ("blocks.csv", "stage,height,zeros,ones,materialized"),
                ("words.csv", "stage,word"),
            ],
            vec!["heights", "zeros"],
        ),
        (
            s(&["measure", "--params", "infinite", "--word", "0", "--stages", "8"]),
            vec![("measure.csv", "stage,occurrences,zeros,value")],
            vec!["estimate", "spacer_mass", "periodicity"],
        ),
        (
            s(&["avg", "--params", &chacon, "--observable", "centered", "--word", "0", "--checkpoints", "10,100"]),
            vec![("averages.csv", "N,value,weight,model,observable")],
            vec!["model", "observable", "values"],
        ),
        (
            s(&["hopf", "--params", "infinite", "--word", "0", "--density-word", "0", "--checkpoints", "10,100"]),
            vec![("averages.csv", "N,value,weight,model,observable")],
            vec!["model", "density", "values"],
        ),
        (
            s(&["dkbsz", "--params", &chacon, "--observable", "centered", "--word", "0", "--p", "2", "--q", "3", "--checkpoints", "100", "--grid", "1024"]),
            vec![
                ("averages.csv", "N,value,weight,model,observable"),
                ("bound.csv", "N,n_tilde,lhs,affinity,rhs,holds"),
            ],
            vec!["values", "lhs", "rhs", "holds"],
        ),
        (
            s(&["spectra", "--params", &chacon, "--stages", "3", "--grid", "256"]),
            vec![("coefficients.csv", "freq,re,im"), ("density.csv", "t,value")],
            vec!["coefficients", "c0", "grid_mean"],
        ),
        (
            s(&["hellinger", "--params", &chacon, "--stages", "2", "--p", "2", "--q", "3", "--grid", "1024"]),
            vec![("hellinger.csv", "stages,value")],
            vec!["hellinger", "series"],
        ),
        (
            s(&["klemes", "--params", &chacon, "--plan-count", "4"]),
            vec![(
                "klemes.csv",
                "j,K,m_j,alpha_re,alpha_im,alpha_neg_re,alpha_neg_im,predicted,sum_re,sum_im,product_re,product_im,increment",
            )],
            vec!["m", "deepest"],
        ),
        (
            s(&["peyriere", "--params", &chacon, "--p", "2", "--q", "3", "--plan-count", "6"]),
            vec![("peyriere.csv", "J,br1_a,br1_b,br2")],
            vec!["br2_slope", "br1_a_sup", "br1_b_sup"],
        ),
        (
            s(&["divergence", "--params", &growing, "--horizon", "50"]),
            vec![("divergence.csv", "residue,sum")],
            vec!["sums", "best"],
        ),
    ]
}

#[test]
fn golden_schema_per_command() {
    for (args, csvs, keys) in schemas() {
        let dir = tempfile::tempdir().unwrap();
        let mut full = args.clone();
        full.extend(["--out".to_string(), dir.path().display().to_string()]);
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        let summary = ok(&full);
        assert!(summary.starts_with("[run]\n"), "{args:?}");
        assert!(summary.contains(&format!("command = {:?}", args[0])));
        for (file, expected) in csvs {
            assert_eq!(header(dir.path(), file), expected, "{args:?} {file}");
        }
        for key in keys {
            assert!(result(&summary, key).is_some(), "{args:?} lacks {key}");
        }
        assert_eq!(
            fs::read_to_string(dir.path().join("summary.txt")).unwrap(),
            summary
        );
    }
}

#[test]
fn no_files_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["words", "--params", "chacon", "--stages", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("files = []"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    for (args, csvs, _) in schemas() {
        let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
        full.extend(["--out", &out]);
        let snapshot = || {
            let summary = ok(&full);
            let body = summary.split_once("\n[config]").unwrap().1.to_string();
            let files: Vec<String> = csvs
                .iter()
                .map(|(f, _)| fs::read_to_string(dir.path().join(f)).unwrap())
                .collect();
            (body, files)
        };
        assert_eq!(snapshot(), snapshot(), "{args:?}");
    }
}

#[test]
fn mertens_at_one_million() {
    let summary = ok(&["sieve", "--limit", "1000000"]);
    assert_eq!(result(&summary, "mertens[1000000]"), Some("212"));
}

#[test]
fn chacon_heights() {
    let summary = ok(&["words", "--params", "chacon", "--stages", "6"]);
    assert_eq!(
        result(&summary, "heights"),
        Some("[1, 4, 13, 40, 121, 364, 1093]")
    );
}

#[test]
fn hellinger_example_in_unit_interval() {
    let summary = ok(&["run", params("hellinger_chacon.toml").to_str().unwrap()]);
    let h: f64 = result(&summary, "hellinger").unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&h), "{h}");
}

#[test]
fn dkbsz_example_holds() {
    let summary = ok(&["run", params("dkbsz_chacon.toml").to_str().unwrap()]);
    assert_eq!(result(&summary, "holds"), Some("true"));
}

#[test]
fn validate_parameter_file() {
    let out = run(&["validate", params("chacon.cfg").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "ok");
}

#[test]
fn validate_rejects_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "command = \"spectra\"\nsystem = \"chacon\"\ngrid = 1000\n",
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("violation field=grid "), "{text}");
}

#[test]
fn equal_primes_are_one_violation() {
    let out = run(&[
        "dkbsz",
        "--params",
        "chacon",
        "--observable",
        "centered",
        "--word",
        "0",
        "--p",
        "3",
        "--q",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(
        err.starts_with("error kind=validation violations=1 field=q"),
        "{err}"
    );
}

#[test]
fn coefficient_budget_from_environment() {
    let out = bin()
        .env("MOEBIUS_COEFF_BUDGET", "10")
        .args(["spectra", "--params", "chacon"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error kind=budget "), "{err}");
    assert!(err.contains("budget 10"), "{err}");
}

#[test]
fn missing_params_file() {
    let out = run(&["words", "--params", "/nonexistent/params.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("field=params"));
}
