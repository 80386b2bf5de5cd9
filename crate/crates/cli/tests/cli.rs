use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const JOEL: &str = "@Begin
@Participants:\tCHI Joel Target_Child, MOT Mother
*MOT:\twhat would you like for your birthday ?
*MOT:\twould you like a train ?
*MOT:\tJoel ?
*CHI:\tyes .
*CHI:\toh .
*CHI:\tI'd like a elephant .
*CHI:\tno .
*CHI:\tand lion .
@End
";

fn lexnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("joel01.cha");
    fs::write(&file, JOEL).unwrap();
    (dir, file)
}

#[test]
fn export_child_network() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["export", "joel01.cha"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("*Vertices 9\n"));
    let arcs = text.split("*Arcs\n").nth(1).unwrap();
    assert_eq!(arcs.lines().count(), 4);
}

#[test]
fn export_mother_network() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["export", "--speaker", "mother", "joel01.cha"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("*Vertices 10\n"));
    assert_eq!(text.split("*Arcs\n").nth(1).unwrap().lines().count(), 8);
}

#[test]
fn mlu_table_lists_both_speakers() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["mlu", "joel01.cha"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "child,visit,source,speaker,utterances,morphemes,mlu,basis,stage\n\
         joel,1,joel01.cha,CHI,5,9,1.8,word,S2\n\
         joel,1,joel01.cha,MOT,3,13,4.33333,word,S2\n"
    );
}

#[test]
fn egonet_of_like() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["egonet", "--word", "like", "joel01.cha"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "*Vertices 3\n1 \"a\"\n2 \"i'd\"\n3 \"like\"\n*Arcs\n2 3\n3 1\n");
}

#[test]
fn egonet_of_missing_word_is_input_error() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["egonet", "--word", "zebra", "joel01.cha"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn overlapping_ranges_exit_with_config_error() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["mlu", "--mlu-range", "[1,2]", "--mlu-range", "[2,3]", "joel01.cha"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("overlap"));
}

#[test]
fn overlapping_ranges_in_config_file() {
    let (dir, _) = fixture();
    fs::write(
        dir.path().join("run.toml"),
        "inputs = [\"joel01.cha\"]\nmlu_ranges = [\"[1,1.5]\", \"[1.5,2]\"]\n",
    )
    .unwrap();
    let o = lexnet(dir.path(), &["report", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_input_error() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["mlu", "nosuch.cha"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_transcript_is_input_error() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("bad.cha"), "*CHI:\tfine .\nnot a tier\n").unwrap();
    let o = lexnet(dir.path(), &["ingest", "bad.cha"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn no_inputs_is_config_error() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["mlu"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_inputs_resolve_relative_to_the_file() {
    let (dir, _) = fixture();
    let sub = dir.path().join("conf");
    fs::create_dir(&sub).unwrap();
    fs::write(sub.join("run.toml"), "inputs = [\"../joel01.cha\"]\noutput_dir = \"../out\"\n").unwrap();
    let o = lexnet(dir.path(), &["report", "--config", "conf/run.toml"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/joel/networks/CHI_S2.net").is_file());
    assert!(dir.path().join("out/joel/networks/MOT_S2.net").is_file());
}

#[test]
fn flags_override_config_keys() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("run.toml"), "inputs = [\"joel01.cha\"]\nk = 1\n").unwrap();
    let o = lexnet(dir.path(), &["hits", "--config", "run.toml", "-k", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"k\": 2"));
}

#[test]
fn report_is_deterministic() {
    let (dir, _) = fixture();
    for out in ["a", "b"] {
        let o = lexnet(dir.path(), &["report", "--output-dir", out, "joel01.cha"]);
        assert!(o.status.success());
    }
    let list = |root: &Path| {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
                }
            }
        }
        files.sort();
        files
    };
    let a = list(&dir.path().join("a"));
    assert!(!a.is_empty());
    assert_eq!(a, list(&dir.path().join("b")));
}

#[test]
fn several_children_need_a_choice() {
    let (dir, _) = fixture();
    fs::write(
        dir.path().join("ruth01.cha"),
        JOEL.replace("CHI Joel", "CHI Ruth"),
    )
    .unwrap();
    let o = lexnet(dir.path(), &["export", "joel01.cha", "ruth01.cha"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lexnet(dir.path(), &["export", "--child", "ruth", "joel01.cha", "ruth01.cha"]);
    assert!(o.status.success());
    let o = lexnet(dir.path(), &["mlu", "joel01.cha", "ruth01.cha"]);
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn shift_defaults_to_articles() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["shift", "joel01.cha"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("word,S2\n"));
    assert!(text.contains("\nthe,--\n"));
}

#[test]
fn build_writes_pajek_files() {
    let (dir, _) = fixture();
    let o = lexnet(dir.path(), &["build", "--mode", "accumulative", "--net-dir", "nets", "joel01.cha"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "child,label,size,arcs,avg_degree\njoel,1,9,4,0.444444\n");
    assert!(dir.path().join("nets/joel/CHI_visit_1.net").is_file());
}
