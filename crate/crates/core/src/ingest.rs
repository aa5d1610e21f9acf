//! CSV record loading and the three network constructions: game outcomes,
//! shot blocks and court-region passes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

pub const NUM_REGIONS: u8 = 28;

/// Default first day-number of the national tournament; games on or after it are postseason.
pub const DEFAULT_TOURNAMENT_START_DAY: i32 = 132;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub season: i32,
    pub day: i32,
    pub team_a: String,
    pub team_b: String,
    pub score_a: u32,
    pub score_b: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub season: i32,
    pub team: String,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub season: i32,
    pub blocker: String,
    pub blocked: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassRecord {
    pub game: String,
    /// 1-4, anything above 4 is overtime.
    pub quarter: u8,
    pub source_region: u8,
    pub target_region: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Game,
    Ranking,
    Block,
    Pass,
}

impl RecordKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            RecordKind::Game => &["season", "day", "team_a", "team_b", "score_a", "score_b"],
            RecordKind::Ranking => &["season", "team", "rank"],
            RecordKind::Block => &["season", "blocker", "blocked", "count"],
            RecordKind::Pass => &["game", "quarter", "source_region", "target_region"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Games(Vec<GameRecord>),
    Rankings(Vec<RankingRecord>),
    Blocks(Vec<BlockRecord>),
    Passes(Vec<PassRecord>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Regular,
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BlockWeight {
    #[default]
    Raw,
    Net,
}

struct Row<'a> {
    path: &'a Path,
    row: u64,
    header: &'a [&'static str],
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    fn err(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Record {
            path: self.path.to_path_buf(),
            row: self.row,
            column: self.header.get(col).unwrap_or(&"*").to_string(),
            message: message.into(),
        }
    }

    fn text(&self, col: usize) -> Result<String> {
        let s = &self.rec[col];
        if s.is_empty() {
            return Err(self.err(col, "empty value"));
        }
        Ok(s.to_string())
    }

    fn num<T: FromStr>(&self, col: usize) -> Result<T> {
        let s = &self.rec[col];
        s.parse()
            .map_err(|_| self.err(col, format!("cannot parse `{s}` as a number")))
    }
}

fn parse_rows<R, T>(
    reader: R,
    path: &Path,
    kind: RecordKind,
    mut parse: impl FnMut(&Row<'_>) -> Result<T>,
) -> Result<Vec<T>>
where
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = kind.header();
    let found = rdr.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let ctx = Row {
            path,
            row,
            header,
            rec: &rec,
        };
        if rec.len() != header.len() {
            return Err(Error::Record {
                path: path.to_path_buf(),
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        out.push(parse(&ctx)?);
    }
    Ok(out)
}

pub fn read_games<R: Read>(reader: R, path: &Path) -> Result<Vec<GameRecord>> {
    parse_rows(reader, path, RecordKind::Game, |r| {
        let g = GameRecord {
            season: r.num(0)?,
            day: r.num(1)?,
            team_a: r.text(2)?,
            team_b: r.text(3)?,
            score_a: r.num(4)?,
            score_b: r.num(5)?,
        };
        if g.team_a == g.team_b {
            return Err(r.err(3, "a team cannot play itself"));
        }
        Ok(g)
    })
}

pub fn read_rankings<R: Read>(reader: R, path: &Path) -> Result<Vec<RankingRecord>> {
    let mut seen: HashMap<(i32, String), u64> = HashMap::new();
    parse_rows(reader, path, RecordKind::Ranking, |r| {
        let rec = RankingRecord {
            season: r.num(0)?,
            team: r.text(1)?,
            rank: r.num(2)?,
        };
        if rec.rank == 0 {
            return Err(r.err(2, "rank must be at least 1"));
        }
        if let Some(first) = seen.insert((rec.season, rec.team.clone()), r.row) {
            return Err(r.err(
                1,
                format!(
                    "duplicate rank for team `{}` in season {} (first at row {first})",
                    rec.team, rec.season
                ),
            ));
        }
        Ok(rec)
    })
}

pub fn read_blocks<R: Read>(reader: R, path: &Path) -> Result<Vec<BlockRecord>> {
    parse_rows(reader, path, RecordKind::Block, |r| {
        let b = BlockRecord {
            season: r.num(0)?,
            blocker: r.text(1)?,
            blocked: r.text(2)?,
            count: r.num(3)?,
        };
        if b.blocker == b.blocked {
            return Err(r.err(2, "a player cannot block themself"));
        }
        if b.count == 0 {
            return Err(r.err(3, "count must be at least 1"));
        }
        Ok(b)
    })
}

pub fn read_passes<R: Read>(reader: R, path: &Path) -> Result<Vec<PassRecord>> {
    parse_rows(reader, path, RecordKind::Pass, |r| {
        let p = PassRecord {
            game: r.text(0)?,
            quarter: r.num(1)?,
            source_region: r.num(2)?,
            target_region: r.num(3)?,
        };
        if p.quarter == 0 {
            return Err(r.err(1, "quarter must be at least 1"));
        }
        for (col, region) in [(2, p.source_region), (3, p.target_region)] {
            if !(1..=NUM_REGIONS).contains(&region) {
                return Err(r.err(col, format!("region {region} outside 1..={NUM_REGIONS}")));
            }
        }
        Ok(p)
    })
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufReader::new(f))
}

pub fn load_records(kind: RecordKind, path: &Path) -> Result<Records> {
    let rdr = open(path)?;
    Ok(match kind {
        RecordKind::Game => Records::Games(read_games(rdr, path)?),
        RecordKind::Ranking => Records::Rankings(read_rankings(rdr, path)?),
        RecordKind::Block => Records::Blocks(read_blocks(rdr, path)?),
        RecordKind::Pass => Records::Passes(read_passes(rdr, path)?),
    })
}

pub fn load_games(path: &Path) -> Result<Vec<GameRecord>> {
    read_games(open(path)?, path)
}

pub fn load_rankings(path: &Path) -> Result<Vec<RankingRecord>> {
    read_rankings(open(path)?, path)
}

pub fn load_blocks(path: &Path) -> Result<Vec<BlockRecord>> {
    read_blocks(open(path)?, path)
}

pub fn load_passes(path: &Path) -> Result<Vec<PassRecord>> {
    read_passes(open(path)?, path)
}

/// Games of `season` that fall into `phase`.
pub fn select_games<'a>(
    games: &'a [GameRecord],
    season: i32,
    phase: Phase,
    tournament_start_day: i32,
) -> impl Iterator<Item = &'a GameRecord> + 'a {
    games.iter().filter(move |g| {
        g.season == season && (phase == Phase::All || g.day < tournament_start_day)
    })
}

/// Distinct unordered pairs that met on or after `tournament_start_day`.
pub fn tournament_matchups(
    games: &[GameRecord],
    season: i32,
    tournament_start_day: i32,
) -> Vec<(String, String)> {
    let set: BTreeSet<(String, String)> = games
        .iter()
        .filter(|g| g.season == season && g.day >= tournament_start_day)
        .map(|g| ordered_pair(&g.team_a, &g.team_b))
        .collect();
    set.into_iter().collect()
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Edge from the team that scored more points across all head-to-head meetings of the
/// season to the other, weighted by the aggregate margin. Even totals give no edge.
/// Records from other seasons are ignored.
pub fn build_adversarial_network<'a, I>(games: I, season: i32) -> WeightedDigraph
where
    I: IntoIterator<Item = &'a GameRecord>,
{
    let mut teams = BTreeSet::new();
    // (lo, hi) -> (points by lo, points by hi)
    let mut totals: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for g in games.into_iter().filter(|g| g.season == season) {
        teams.insert(g.team_a.clone());
        teams.insert(g.team_b.clone());
        let key = ordered_pair(&g.team_a, &g.team_b);
        let (lo_pts, hi_pts) = if g.team_a <= g.team_b {
            (g.score_a, g.score_b)
        } else {
            (g.score_b, g.score_a)
        };
        let e = totals.entry(key).or_default();
        e.0 += lo_pts as u64;
        e.1 += hi_pts as u64;
    }
    let mut graph = WeightedDigraph::with_labels(teams);
    for ((lo, hi), (lo_pts, hi_pts)) in totals {
        let (winner, loser, margin) = match lo_pts.cmp(&hi_pts) {
            std::cmp::Ordering::Greater => (lo, hi, lo_pts - hi_pts),
            std::cmp::Ordering::Less => (hi, lo, hi_pts - lo_pts),
            std::cmp::Ordering::Equal => continue,
        };
        let (u, v) = (
            graph.node_id(&winner).unwrap(),
            graph.node_id(&loser).unwrap(),
        );
        graph
            .add_edge_accumulate(u, v, margin as f64)
            .expect("valid ids and positive margin");
    }
    graph
}

/// Edge from the player who blocked the other strictly more often. `Raw` weights by the
/// dominant player's count, `Net` by the difference.
pub fn build_blocking_network<'a, I>(
    blocks: I,
    season: i32,
    weighting: BlockWeight,
) -> WeightedDigraph
where
    I: IntoIterator<Item = &'a BlockRecord>,
{
    let mut players = BTreeSet::new();
    let mut counts: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for b in blocks.into_iter().filter(|b| b.season == season) {
        players.insert(b.blocker.clone());
        players.insert(b.blocked.clone());
        let key = ordered_pair(&b.blocker, &b.blocked);
        let e = counts.entry(key).or_default();
        if b.blocker <= b.blocked {
            e.0 += b.count as u64;
        } else {
            e.1 += b.count as u64;
        }
    }
    let mut graph = WeightedDigraph::with_labels(players);
    for ((lo, hi), (lo_blocks, hi_blocks)) in counts {
        let (src, dst, dominant, other) = match lo_blocks.cmp(&hi_blocks) {
            std::cmp::Ordering::Greater => (lo, hi, lo_blocks, hi_blocks),
            std::cmp::Ordering::Less => (hi, lo, hi_blocks, lo_blocks),
            std::cmp::Ordering::Equal => continue,
        };
        let w = match weighting {
            BlockWeight::Raw => dominant,
            BlockWeight::Net => dominant - other,
        };
        let (u, v) = (graph.node_id(&src).unwrap(), graph.node_id(&dst).unwrap());
        graph
            .add_edge_accumulate(u, v, w as f64)
            .expect("valid ids and positive count");
    }
    graph
}

/// Region graph over all 28 regions (labelled "1".."28") counting passes of `game`
/// in the selected quarters. Intra-region passes become self-loops.
pub fn build_passing_network<'a, I>(
    passes: I,
    game: &str,
    quarters: &BTreeSet<u8>,
) -> Result<WeightedDigraph>
where
    I: IntoIterator<Item = &'a PassRecord>,
{
    if quarters.is_empty() {
        return Err(Error::invalid("quarter selection is empty"));
    }
    let mut graph = WeightedDigraph::with_labels((1..=NUM_REGIONS).map(|r| r.to_string()));
    for p in passes
        .into_iter()
        .filter(|p| p.game == game && quarters.contains(&p.quarter))
    {
        graph.add_edge_accumulate(
            (p.source_region - 1) as usize,
            (p.target_region - 1) as usize,
            1.0,
        )?;
    }
    Ok(graph)
}

/// Parses `1,2,3` or ranges like `2-4`; `ot` selects every overtime period.
pub fn parse_quarters(spec: &str) -> Result<BTreeSet<u8>> {
    let mut out = BTreeSet::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if part.eq_ignore_ascii_case("ot") {
            out.extend(5..=u8::MAX);
            continue;
        }
        let bad = || Error::invalid(format!("bad quarter selector `{part}`"));
        if let Some((a, b)) = part.split_once('-') {
            let a: u8 = a.trim().parse().map_err(|_| bad())?;
            let b: u8 = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            let q: u8 = part.parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            out.insert(q);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("quarter selection is empty"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn game(a: &str, b: &str, sa: u32, sb: u32) -> GameRecord {
        GameRecord {
            season: 2024,
            day: 10,
            team_a: a.into(),
            team_b: b.into(),
            score_a: sa,
            score_b: sb,
        }
    }

    fn block(a: &str, b: &str, n: u32) -> BlockRecord {
        BlockRecord {
            season: 2023,
            blocker: a.into(),
            blocked: b.into(),
            count: n,
        }
    }

    fn pass(q: u8, s: u8, t: u8) -> PassRecord {
        PassRecord {
            game: "g1".into(),
            quarter: q,
            source_region: s,
            target_region: t,
        }
    }

    #[test]
    fn parses_game_csv() {
        let data = "season,day,team_a,team_b,score_a,score_b\n\
                    2024,1,A,B,70,60\r\n2024,2,B,C,55,50\n2024,3,\"C, Tech\",A,1,2\n";
        let games = read_games(data.as_bytes(), Path::new("games.csv")).unwrap();
        assert_eq!(games.len(), 3);
        assert_eq!(games[2].team_a, "C, Tech");
    }

    #[test]
    fn region_out_of_bounds_names_row() {
        let data = "game,quarter,source_region,target_region\ng,1,3,4\ng,1,29,4\n";
        match read_passes(data.as_bytes(), Path::new("p.csv")) {
            Err(Error::Record { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "source_region");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_block_rejected() {
        let data = "season,blocker,blocked,count\n2023,X,X,1\n";
        assert!(matches!(
            read_blocks(data.as_bytes(), Path::new("b.csv")),
            Err(Error::Record { row: 2, .. })
        ));
    }

    #[test]
    fn bad_number_and_header() {
        let data = "season,day,team_a,team_b,score_a,score_b\n2024,x,A,B,1,2\n";
        match read_games(data.as_bytes(), Path::new("g.csv")) {
            Err(Error::Record { column, .. }) => assert_eq!(column, "day"),
            other => panic!("unexpected {other:?}"),
        }
        let data = "season,team\n2024,A\n";
        assert!(matches!(
            read_rankings(data.as_bytes(), Path::new("r.csv")),
            Err(Error::Schema { .. })
        ));
        let data = "season,team,rank\n2024,A,1,9\n";
        assert!(matches!(
            read_rankings(data.as_bytes(), Path::new("r.csv")),
            Err(Error::Record { .. })
        ));
    }

    #[test]
    fn duplicate_ranking_rejected() {
        let data = "season,team,rank\n2024,A,1\n2024,B,2\n2024,A,3\n2023,A,3\n";
        match read_rankings(data.as_bytes(), Path::new("r.csv")) {
            Err(Error::Record { row, .. }) => assert_eq!(row, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adversarial_aggregates_head_to_head() {
        let games = [game("u", "v", 70, 60), game("v", "u", 65, 63)];
        let g = build_adversarial_network(&games, 2024);
        let (u, v) = (g.node_id("u").unwrap(), g.node_id("v").unwrap());
        assert_eq!(g.weight(u, v), Some(8.0));
        assert!(!g.has_edge(v, u));
    }

    #[test]
    fn adversarial_tie_gives_no_edge() {
        let g = build_adversarial_network(&[game("u", "v", 50, 50)], 2024);
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 0);
        assert_eq!(build_adversarial_network(&[], 2024).num_nodes(), 0);
    }

    #[test]
    fn adversarial_filters_season_and_phase() {
        let mut late = game("a", "b", 80, 40);
        late.day = 140;
        let other = GameRecord {
            season: 2023,
            ..game("a", "c", 1, 0)
        };
        let games = vec![game("a", "b", 10, 20), late, other];
        let all = build_adversarial_network(select_games(&games, 2024, Phase::All, 132), 2024);
        assert_eq!(all.num_nodes(), 2);
        let (a, b) = (all.node_id("a").unwrap(), all.node_id("b").unwrap());
        assert_eq!(all.weight(a, b), Some(30.0));
        let reg = build_adversarial_network(select_games(&games, 2024, Phase::Regular, 132), 2024);
        assert_eq!(reg.weight(b, a), Some(10.0));
        assert_eq!(
            tournament_matchups(&games, 2024, 132),
            vec![("a".into(), "b".into())]
        );
    }

    #[test]
    fn blocking_rules() {
        let g = build_blocking_network(
            &[block("u", "v", 3), block("v", "u", 1)],
            2023,
            BlockWeight::Raw,
        );
        let (u, v) = (g.node_id("u").unwrap(), g.node_id("v").unwrap());
        assert_eq!(g.weight(u, v), Some(3.0));
        assert!(!g.has_edge(v, u));

        let net = build_blocking_network(
            &[block("u", "v", 3), block("v", "u", 1)],
            2023,
            BlockWeight::Net,
        );
        assert_eq!(net.weight(u, v), Some(2.0));

        let tie = build_blocking_network(
            &[block("u", "v", 2), block("v", "u", 2)],
            2023,
            BlockWeight::Raw,
        );
        assert_eq!(tie.num_edges(), 0);

        let one = build_blocking_network(&[block("u", "v", 1)], 2023, BlockWeight::Raw);
        assert_eq!(one.weight(0, 1), Some(1.0));
    }

    #[test]
    fn passing_counts_and_filters() {
        let passes = vec![
            pass(1, 3, 4),
            pass(1, 3, 4),
            pass(1, 3, 4),
            pass(2, 5, 5),
            pass(5, 1, 2),
        ];
        let q1 = build_passing_network(&passes, "g1", &[1].into()).unwrap();
        assert_eq!(q1.num_nodes(), 28);
        assert_eq!(q1.weight(2, 3), Some(3.0));
        let later = build_passing_network(&passes, "g1", &parse_quarters("2-4").unwrap()).unwrap();
        assert!(!later.has_edge(2, 3));
        assert_eq!(later.weight(4, 4), Some(1.0));
        let ot = build_passing_network(&passes, "g1", &parse_quarters("ot").unwrap()).unwrap();
        assert_eq!(ot.total_weight(), 1.0);
        assert!(build_passing_network(&passes, "g1", &BTreeSet::new()).is_err());
        assert!(
            build_passing_network(&passes, "nope", &[1].into())
                .unwrap()
                .num_edges()
                == 0
        );
    }

    #[test]
    fn quarter_parsing() {
        assert_eq!(parse_quarters("1").unwrap(), [1].into());
        assert_eq!(parse_quarters("2-4").unwrap(), [2, 3, 4].into());
        assert_eq!(parse_quarters("1, 3").unwrap(), [1, 3].into());
        assert!(parse_quarters("").is_err());
        assert!(parse_quarters("0").is_err());
        assert!(parse_quarters("4-2").is_err());
    }

    proptest! {
        #[test]
        fn adversarial_invariants(
            raw in prop::collection::vec((0usize..6, 0usize..6, 0u32..100, 0u32..100), 0..40)
        ) {
            let names = ["a", "b", "c", "d", "e", "f"];
            let games: Vec<GameRecord> = raw
                .iter()
                .filter(|(x, y, _, _)| x != y)
                .map(|&(x, y, sa, sb)| game(names[x], names[y], sa, sb))
                .collect();
            let g = build_adversarial_network(&games, 2024);
            let mut expect = 0i64;
            let mut diff: BTreeMap<(String, String), i64> = BTreeMap::new();
            for gm in &games {
                let (k, d) = if gm.team_a < gm.team_b {
                    (ordered_pair(&gm.team_a, &gm.team_b), gm.score_a as i64 - gm.score_b as i64)
                } else {
                    (ordered_pair(&gm.team_a, &gm.team_b), gm.score_b as i64 - gm.score_a as i64)
                };
                *diff.entry(k).or_default() += d;
            }
            for d in diff.values() {
                expect += d.abs();
            }
            prop_assert_eq!(g.total_weight(), expect as f64);
            for (u, v, _) in g.edges() {
                prop_assert!(u != v);
                prop_assert!(!g.has_edge(v, u));
            }
        }

        #[test]
        fn blocking_invariants(
            raw in prop::collection::vec((0usize..5, 0usize..5, 1u32..5), 0..30)
        ) {
            let names = ["a", "b", "c", "d", "e"];
            let blocks: Vec<BlockRecord> = raw
                .iter()
                .filter(|(x, y, _)| x != y)
                .map(|&(x, y, n)| block(names[x], names[y], n))
                .collect();
            let g = build_blocking_network(&blocks, 2023, BlockWeight::Raw);
            for (u, v, w) in g.edges() {
                prop_assert!(u != v);
                prop_assert!(!g.has_edge(v, u));
                prop_assert!(w >= 1.0);
            }
        }

        #[test]
        fn passing_weight_equals_selected_passes(
            raw in prop::collection::vec((1u8..6, 1u8..=28, 1u8..=28), 0..80)
        ) {
            let passes: Vec<PassRecord> = raw.iter().map(|&(q, s, t)| pass(q, s, t)).collect();
            let sel: BTreeSet<u8> = [1, 3].into();
            let g = build_passing_network(&passes, "g1", &sel).unwrap();
            let n = passes.iter().filter(|p| sel.contains(&p.quarter)).count();
            prop_assert_eq!(g.total_weight(), n as f64);
        }
    }
}
