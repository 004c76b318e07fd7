//! Deterministic synthetic corpora in the SMD (kvret JSON) and bAbI
//! dialog-task-5 text formats, used as stand-ins when the real test files
//! are not available.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

pub const SMD_DIALOGS: usize = 304;
pub const SMD_UTTERANCES: usize = 1626;
pub const BABI_DIALOGS: usize = 1000;

/// Environment variables pointing at the real test files.
pub const SMD_ENV: &str = "NATVAR_SMD_TEST";
pub const BABI_ENV: &str = "NATVAR_BABI_TEST";

/// The SMD stand-in: 304 dialogs, 1626 utterances.
pub fn smd_standin() -> String {
    smd_corpus_with_total(20_170_417, SMD_DIALOGS, SMD_UTTERANCES)
}

/// The bAbI task-5 stand-in: 1000 dialogs.
pub fn babi_standin() -> String {
    babi_corpus(20_160_530, BABI_DIALOGS)
}

/// Real file contents when the variable is set, else the stand-in. The flag
/// tells which one was used.
pub fn smd_test_file() -> (String, bool) {
    match std::env::var(SMD_ENV)
        .ok()
        .and_then(|p| std::fs::read_to_string(p).ok())
    {
        Some(text) => (text, true),
        None => (smd_standin(), false),
    }
}

pub fn babi_test_file() -> (String, bool) {
    match std::env::var(BABI_ENV)
        .ok()
        .and_then(|p| std::fs::read_to_string(p).ok())
    {
        Some(text) => (text, true),
        None => (babi_standin(), false),
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty choice list")
}

fn title(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

// ---------------------------------------------------------------- SMD

const POI_TYPES: &[&str] = &[
    "gas station",
    "coffee or tea place",
    "grocery store",
    "parking garage",
    "rest stop",
    "hospital",
    "chinese restaurant",
    "shopping center",
];
const POIS: &[&str] = &[
    "Chevron",
    "Valero",
    "Shell",
    "Coupa",
    "Peets Coffee",
    "Safeway",
    "Whole Foods",
    "Civic Center Garage",
    "Dish Parking",
    "Palo Alto Cafe",
    "Stanford Express Care",
    "Tai Pan",
    "Panda Express",
    "Town and Country",
    "Stanford Shopping Center",
    "Four Seasons",
    "Jacks House",
    "Mandarin Roots",
    "Willows Market",
    "Teavana",
];
const STREETS: &[&str] = &[
    "Arcadia Pl",
    "Alester Ave",
    "El Camino Real",
    "Ames Ct",
    "Bryant St",
    "Alma St",
    "Webster St",
    "Hacienda St",
    "Middlefield Rd",
    "Ramona St",
    "Cowper St",
    "Oak Rd",
];
const TRAFFIC: &[&str] = &[
    "no traffic",
    "moderate traffic",
    "heavy traffic",
    "road block nearby",
    "car collision nearby",
];
const CITIES: &[&str] = &[
    "san francisco",
    "new york",
    "boston",
    "seattle",
    "fresno",
    "alhambra",
    "mountain view",
    "danville",
    "carson",
    "redwood city",
    "cleveland",
    "brentwood",
    "durham",
    "inglewood",
    "san mateo",
    "exeter",
    "corona",
    "manhattan",
    "compton",
    "atherton",
    "menlo park",
    "san jose",
    "oakland",
    "grand rapids",
    "downtown chicago",
    "los angeles",
];
const DAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];
const CONDITIONS: &[&str] = &[
    "rain",
    "snow",
    "clear skies",
    "cloudy",
    "foggy",
    "drizzle",
    "hail",
    "warm",
    "windy",
    "dry",
    "humid",
    "overcast",
    "stormy",
    "misty",
    "frost",
    "blizzard",
    "hot",
    "dew",
];
const EVENTS: &[&str] = &[
    "dentist appointment",
    "doctor appointment",
    "tennis activity",
    "football activity",
    "swimming activity",
    "yoga activity",
    "dinner",
    "lab appointment",
    "optometrist appointment",
    "conference",
    "meeting",
    "taking medicine",
    "dinner with my sister",
];
const TIMES: &[&str] = &[
    "9am", "10am", "11am", "1pm", "2pm", "3pm", "4pm", "5pm", "6pm", "7pm",
];
const PARTIES: &[&str] = &[
    "sister", "mother", "father", "boss", "brother", "aunt", "Tom", "Jeff", "Marie", "Alex",
];
const ROOMS: &[&str] = &[
    "conference room 50",
    "conference room 100",
    "conference room 102",
    "-",
];
const AGENDAS: &[&str] = &[
    "go over budget",
    "discuss the merger",
    "onboard new members",
    "-",
];

struct SmdTurn {
    driver: bool,
    text: String,
    slots: Vec<(&'static str, String)>,
    requested: Vec<(&'static str, bool)>,
}

fn driver(text: impl Into<String>) -> SmdTurn {
    SmdTurn {
        driver: true,
        text: text.into(),
        slots: Vec::new(),
        requested: Vec::new(),
    }
}

fn assistant(text: impl Into<String>) -> SmdTurn {
    SmdTurn {
        driver: false,
        text: text.into(),
        slots: Vec::new(),
        requested: Vec::new(),
    }
}

impl SmdTurn {
    fn slot(mut self, k: &'static str, v: impl Into<String>) -> Self {
        self.slots.push((k, v.into()));
        self
    }

    fn req(mut self, keys: &[(&'static str, bool)]) -> Self {
        self.requested.extend_from_slice(keys);
        self
    }
}

struct SmdDialog {
    intent: &'static str,
    turns: Vec<SmdTurn>,
    kb_items: Option<Vec<Map<String, Value>>>,
    columns: Vec<&'static str>,
    kb_title: &'static str,
}

fn item(pairs: &[(&str, String)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
        .collect()
}

fn closing(rng: &mut ChaCha8Rng, turns: &mut Vec<SmdTurn>) {
    match rng.gen_range(0..4) {
        0 => {}
        1 => turns.push(driver(pick(
            rng,
            &["Thanks!", "Thank you.", "Great, thanks."],
        ))),
        _ => {
            turns.push(driver(pick(
                rng,
                &[
                    "Thanks!",
                    "Thank you.",
                    "Great, thanks.",
                    "Perfect, thank you.",
                ],
            )));
            turns.push(assistant(pick(
                rng,
                &[
                    "You're welcome!",
                    "You are welcome.",
                    "Happy to help, drive safely!",
                ],
            )));
        }
    }
}

fn navigate(rng: &mut ChaCha8Rng) -> SmdDialog {
    let n = rng.gen_range(4..=7);
    let mut names: Vec<&str> = POIS.to_vec();
    names.shuffle(rng);
    let types: Vec<&str> = (0..n).map(|_| pick(rng, POI_TYPES)).collect();
    let items: Vec<Map<String, Value>> = (0..n)
        .map(|i| {
            item(&[
                ("poi", names[i].to_string()),
                ("distance", format!("{} miles", rng.gen_range(1..=8))),
                ("traffic_info", pick(rng, TRAFFIC).to_string()),
                ("poi_type", types[i].to_string()),
                (
                    "address",
                    format!("{} {}", rng.gen_range(100..999), pick(rng, STREETS)),
                ),
            ])
        })
        .collect();
    let get = |i: usize, k: &str| items[i][k].as_str().unwrap().to_string();
    let t = rng.gen_range(0..n);
    let (poi, poi_type, dist, addr, traffic) = (
        get(t, "poi"),
        get(t, "poi_type"),
        get(t, "distance"),
        get(t, "address"),
        get(t, "traffic_info"),
    );
    let mut turns = Vec::new();
    match rng.gen_range(0..20) {
        0..=6 => {
            turns.push(driver(
                pick(
                    rng,
                    &[
                        "Where is the nearest {}?",
                        "Give me directions to the closest {}.",
                        "Find me a {} please.",
                    ],
                )
                .replace("{}", &poi_type),
            ));
            turns.push(
                assistant(format!(
                    "The nearest {poi_type} is {poi}, {dist} away at {addr}."
                ))
                .slot("poi_type", &poi_type)
                .req(&[("distance", true), ("address", true), ("poi", true)]),
            );
            if rng.gen_bool(0.6) {
                turns.push(driver(pick(
                    rng,
                    &[
                        "Is there any traffic on the way?",
                        "How is the traffic there?",
                        "What is the fastest route?",
                    ],
                )));
                turns.push(
                    assistant(format!(
                        "There is {traffic} on the way to {poi}, I sent the route to your screen."
                    ))
                    .slot("poi", &poi)
                    .req(&[("traffic_info", true)]),
                );
            }
        }
        7..=16 => {
            turns.push(driver(
                pick(
                    rng,
                    &[
                        "I need to get to a {}.",
                        "Take me to a {}.",
                        "Car, I need a {}.",
                    ],
                )
                .replace("{}", &poi_type),
            ));
            turns.push(
                assistant(pick(rng, &[
                    "There are several {t}s nearby, do you want the one with the least traffic?",
                    "I have a few {t}s in the area, would you like the closest one?",
                ]).replace("{t}", &poi_type))
                .slot("poi_type", &poi_type),
            );
            turns.push(driver(pick(
                rng,
                &["Yes please.", "Yes, the closest one.", "Sure, that works."],
            )));
            turns.push(
                assistant(format!(
                    "{poi} is {dist} away at {addr} with {traffic}, setting navigation now."
                ))
                .slot("poi_type", &poi_type)
                .req(&[("poi", true), ("distance", true), ("traffic_info", true)]),
            );
        }
        _ => {
            let missing = pick(rng, &["pizza restaurant", "pharmacy", "home"]);
            turns.push(driver(format!("Is there a {missing} around here?")));
            turns.push(assistant(
                pick(
                    rng,
                    &[
                        "Sorry, there are no {m}s in your area.",
                        "Unfortunately I can't find a {m} nearby.",
                    ],
                )
                .replace("{m}", missing),
            ));
            turns.push(driver(format!("Then take me to {poi}.")));
            turns.push(
                assistant(format!("{poi} is {dist} away, the route has {traffic}."))
                    .slot("poi", &poi)
                    .req(&[("distance", true), ("traffic_info", true)]),
            );
        }
    }
    closing(rng, &mut turns);
    SmdDialog {
        intent: "navigate",
        turns,
        kb_items: Some(items),
        columns: vec!["poi", "distance", "traffic_info", "poi_type", "address"],
        kb_title: "location information",
    }
}

fn forecast(rng: &mut ChaCha8Rng) -> String {
    let low = rng.gen_range(2..8) * 10;
    format!(
        "{}, low of {}F, high of {}F",
        pick(rng, CONDITIONS),
        low,
        low + rng.gen_range(1..3) * 10
    )
}

fn weather(rng: &mut ChaCha8Rng) -> SmdDialog {
    let n = rng.gen_range(4..=7);
    let mut cities: Vec<&str> = CITIES.to_vec();
    cities.shuffle(rng);
    let today = pick(rng, DAYS);
    let items: Vec<Map<String, Value>> = (0..n)
        .map(|i| {
            let mut m = item(&[("location", cities[i].to_string())]);
            for d in DAYS {
                m.insert(d.to_string(), Value::String(forecast(rng)));
            }
            m.insert("today".into(), Value::String(today.to_string()));
            m
        })
        .collect();
    let c = rng.gen_range(0..n);
    let city = cities[c];
    let day = pick(rng, DAYS);
    let fc = items[c][day].as_str().unwrap().to_string();
    let cond = fc.split(',').next().unwrap().to_string();
    let mut turns = Vec::new();
    match rng.gen_range(0..20) {
        0..=5 => {
            let asked = pick(rng, CONDITIONS);
            turns.push(driver(format!(
                "Will there be {asked} in {} on {day}?",
                title(city)
            )));
            let answer = if asked == cond {
                format!("Yes, there will be {cond} in {city} on {day}.")
            } else {
                format!("No {asked} in {city} on {day}, the forecast says {cond}.")
            };
            turns.push(
                assistant(answer)
                    .slot("location", city)
                    .slot("weather_attribute", asked)
                    .slot("date", day)
                    .req(&[("location", true), ("date", true)]),
            );
        }
        6..=17 => {
            turns.push(driver(pick(
                rng,
                &[
                    "What is the forecast for this week?",
                    "Check the weather for me.",
                    "Is it going to be cold this week?",
                ],
            )));
            turns.push(assistant(pick(
                rng,
                &[
                    "Which city would you like the forecast for?",
                    "What city are you interested in?",
                ],
            )));
            turns.push(driver(format!("{}, please.", title(city))));
            turns.push(
                assistant(format!("On {day} {city} will have {cond}."))
                    .slot("location", city)
                    .req(&[("location", true)]),
            );
        }
        _ => {
            let far = pick(rng, &["paris", "tokyo", "sydney"]);
            turns.push(driver(format!(
                "What's the weather in {} today?",
                title(far)
            )));
            turns.push(assistant(
                pick(
                    rng,
                    &[
                        "Sorry, I don't have weather information for {c}.",
                        "I'm unable to find the forecast for {c}.",
                    ],
                )
                .replace("{c}", far),
            ));
            turns.push(driver(format!("What about {}?", title(city))));
            turns.push(
                assistant(format!(
                    "It is {today} and {city} has {}.",
                    items[c][today].as_str().unwrap()
                ))
                .slot("location", city)
                .req(&[("location", true)]),
            );
        }
    }
    if rng.gen_bool(0.3) {
        let other = cities[(c + 1) % n];
        turns.push(driver(format!("And what about {} on {day}?", title(other))));
        let ofc = items[(c + 1) % n][day].as_str().unwrap().to_string();
        turns.push(
            assistant(format!("In {other} on {day} expect {ofc}."))
                .slot("location", other)
                .slot("date", day),
        );
    }
    closing(rng, &mut turns);
    let mut columns = vec!["location"];
    columns.extend_from_slice(DAYS);
    columns.push("today");
    SmdDialog {
        intent: "weather",
        turns,
        kb_items: Some(items),
        columns,
        kb_title: "weekly forecast",
    }
}

fn schedule(rng: &mut ChaCha8Rng) -> SmdDialog {
    let mode = rng.gen_range(0..20);
    let columns = vec!["event", "time", "date", "room", "agenda", "party"];
    let event = pick(rng, EVENTS);
    let (date, time) = (pick(rng, DAYS), pick(rng, TIMES));
    let mut turns = Vec::new();
    if mode < 7 {
        // a new event: no KB
        turns.push(driver(format!("Schedule a {event}.")));
        turns.push(assistant("What day and time should I set it for?").slot("event", event));
        turns.push(driver(format!("{} at {time}.", title(date))));
        turns.push(
            assistant(format!(
                "Okay, I scheduled your {event} for {date} at {time}."
            ))
            .slot("event", event)
            .slot("date", date)
            .slot("time", time),
        );
        closing(rng, &mut turns);
        return SmdDialog {
            intent: "schedule",
            turns,
            kb_items: None,
            columns,
            kb_title: "",
        };
    }
    let n = rng.gen_range(3..=6);
    let mut events: Vec<&str> = EVENTS.to_vec();
    events.shuffle(rng);
    let items: Vec<Map<String, Value>> = (0..n)
        .map(|i| {
            let meeting = events[i] == "meeting" || events[i] == "conference";
            item(&[
                ("event", events[i].to_string()),
                ("time", pick(rng, TIMES).to_string()),
                ("date", pick(rng, DAYS).to_string()),
                (
                    "room",
                    if meeting { pick(rng, ROOMS) } else { "-" }.to_string(),
                ),
                (
                    "agenda",
                    if meeting { pick(rng, AGENDAS) } else { "-" }.to_string(),
                ),
                ("party", pick(rng, PARTIES).to_string()),
            ])
        })
        .collect();
    let get = |i: usize, k: &str| items[i][k].as_str().unwrap().to_string();
    let e = rng.gen_range(0..n);
    let (ev, d, t, party) = (
        get(e, "event"),
        get(e, "date"),
        get(e, "time"),
        get(e, "party"),
    );
    if mode < 14 {
        turns.push(driver(format!("When is my {ev}?")));
        turns.push(
            assistant(format!("Your {ev} is on {d} at {t}."))
                .slot("event", &ev)
                .req(&[("date", true), ("time", true)]),
        );
        if rng.gen_bool(0.5) {
            turns.push(driver("Who is attending?"));
            turns.push(
                assistant(format!("Your {ev} is with your {party}."))
                    .slot("event", &ev)
                    .req(&[("party", true)]),
            );
        }
    } else {
        let (ev2, d2) = (get((e + 1) % n, "event"), get((e + 1) % n, "date"));
        turns.push(driver(pick(
            rng,
            &[
                "What do I have on my calendar this week?",
                "Show me my upcoming appointments.",
            ],
        )));
        turns.push(
            assistant(format!("You have a {ev} on {d} and a {ev2} on {d2}."))
                .req(&[("event", true), ("date", true)]),
        );
        turns.push(driver(format!("What time is the {ev}?")));
        turns.push(assistant(format!("The {ev} is at {t}.")).slot("event", &ev));
    }
    closing(rng, &mut turns);
    SmdDialog {
        intent: "schedule",
        turns,
        kb_items: Some(items),
        columns,
        kb_title: "calendar",
    }
}

fn smd_json(dialogs: &[SmdDialog], rng: &mut ChaCha8Rng) -> String {
    let out: Vec<Value> = dialogs
        .iter()
        .map(|d| {
            let last_agent = d.turns.iter().rposition(|t| !t.driver);
            let turns: Vec<Value> = d
                .turns
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    if t.driver {
                        json!({"turn": "driver", "data": {"end_dialogue": false, "utterance": t.text}})
                    } else {
                        let requested: Map<String, Value> =
                            t.requested.iter().map(|(k, v)| (k.to_string(), Value::Bool(*v))).collect();
                        let slots: Map<String, Value> =
                            t.slots.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
                        json!({"turn": "assistant", "data": {
                            "end_dialogue": Some(k) == last_agent,
                            "requested": requested,
                            "slots": slots,
                            "utterance": t.text,
                        }})
                    }
                })
                .collect();
            let uuid = format!(
                "{:08x}-{:04x}-{:04x}-{:04x}-{:012x}",
                rng.gen::<u32>(),
                rng.gen::<u16>(),
                0x4000 | (rng.gen::<u16>() & 0x0fff),
                0x8000 | (rng.gen::<u16>() & 0x3fff),
                rng.gen::<u64>() & 0xffff_ffff_ffff
            );
            json!({
                "dialogue": turns,
                "scenario": {
                    "kb": {
                        "items": d.kb_items.clone().map(|v| Value::Array(v.into_iter().map(Value::Object).collect())).unwrap_or(Value::Null),
                        "column_names": d.columns,
                        "kb_title": d.kb_title,
                    },
                    "task": {"intent": d.intent},
                    "uuid": uuid,
                }
            })
        })
        .collect();
    serde_json::to_string_pretty(&Value::Array(out)).expect("json renders")
}

fn smd_dialogs(rng: &mut ChaCha8Rng, n: usize) -> Vec<SmdDialog> {
    (0..n)
        .map(|i| match i % 3 {
            0 => schedule(rng),
            1 => weather(rng),
            _ => navigate(rng),
        })
        .collect()
}

/// `n` SMD-style dialogs in kvret JSON layout (2-space indent).
pub fn smd_corpus(seed: u64, n: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dialogs = smd_dialogs(&mut rng, n);
    smd_json(&dialogs, &mut rng)
}

/// Like [`smd_corpus`], with trailing "thanks" turns added or dropped until
/// the corpus holds exactly `total` utterances.
pub fn smd_corpus_with_total(seed: u64, n: usize, total: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dialogs = smd_dialogs(&mut rng, n);
    let mut count: usize = dialogs.iter().map(|d| d.turns.len()).sum();
    let mut i = 0;
    let mut stalled = 0;
    while count != total && stalled < n {
        let d = &mut dialogs[i % n];
        let ends_with_driver = d.turns.last().is_some_and(|t| t.driver);
        if count > total && ends_with_driver && d.turns.len() > 2 {
            d.turns.pop();
            count -= 1;
            stalled = 0;
        } else if count < total && !ends_with_driver {
            d.turns.push(driver("Thanks."));
            count += 1;
            stalled = 0;
        } else {
            stalled += 1;
        }
        i += 1;
    }
    assert_eq!(
        count, total,
        "cannot reach {total} utterances with {n} dialogs"
    );
    smd_json(&dialogs, &mut rng)
}

// ---------------------------------------------------------------- bAbI

const CUISINES: &[&str] = &[
    "british",
    "cantonese",
    "french",
    "indian",
    "italian",
    "japanese",
    "korean",
    "spanish",
    "thai",
    "vietnamese",
];
const LOCATIONS: &[&str] = &[
    "bangkok", "beijing", "bombay", "hanoi", "london", "madrid", "paris", "rome", "seoul", "tokyo",
];
const SIZES: &[&str] = &["two", "four", "six", "eight"];
const PRICES: &[&str] = &["cheap", "moderate", "expensive"];

const ASK: [&str; 4] = [
    "any preference on a type of cuisine",
    "where should it be",
    "how many people would be in your party",
    "which price range are looking for",
];

fn answer(slot: usize, v: &str, rng: &mut ChaCha8Rng) -> String {
    match slot {
        0 => pick(rng, &["with {} food", "{} food", "i love {} food"]).replace("{}", v),
        1 => pick(rng, &["{} please", "in {}", "{}"]).replace("{}", v),
        2 => pick(rng, &["for {} please", "we will be {}", "{}"]).replace("{}", v),
        _ => pick(
            rng,
            &[
                "in a {} price range please",
                "i am looking for a {} restaurant",
                "{}",
            ],
        )
        .replace("{}", v),
    }
}

fn opening(slots: &[usize], vals: &[&str; 4], rng: &mut ChaCha8Rng) -> String {
    let mut s = pick(
        rng,
        &[
            "can you book a table",
            "may i have a table",
            "i'd like to book a table",
            "can you make a restaurant reservation",
        ],
    )
    .to_string();
    for &k in slots {
        s.push(' ');
        s.push_str(&match k {
            0 => format!("with {} food", vals[0]),
            1 => format!("in {}", vals[1]),
            2 => format!("for {} people", vals[2]),
            _ => format!("in a {} price range", vals[3]),
        });
    }
    s
}

struct BabiDialog {
    lines: Vec<String>,
}

impl BabiDialog {
    fn push(&mut self, user: &str, agent: &str) {
        self.lines.push(format!("{user}\t{agent}"));
    }
}

fn babi_dialog(rng: &mut ChaCha8Rng) -> BabiDialog {
    let mut d = BabiDialog { lines: Vec::new() };
    let mut vals = [
        pick(rng, CUISINES),
        pick(rng, LOCATIONS),
        pick(rng, SIZES),
        pick(rng, PRICES),
    ];
    d.push(
        pick(rng, &["hi", "hello", "good morning"]),
        "hello what can i help you with today",
    );
    let mut given: Vec<usize> = (0..4).filter(|_| rng.gen_bool(0.35)).collect();
    if given.len() == 4 {
        given.pop();
    }
    d.push(&opening(&given, &vals, rng), "i'm on it");
    let asked: Vec<usize> = (0..4).filter(|k| !given.contains(k)).collect();
    // the first question follows a silence
    let mut pending_user = "<SILENCE>".to_string();
    for &k in &asked {
        d.push(&pending_user, ASK[k]);
        pending_user = answer(k, vals[k], rng);
    }
    d.push(&pending_user, "ok let me look into some options for you");
    d.push(
        "<SILENCE>",
        &format!("api_call {} {} {} {}", vals[0], vals[1], vals[2], vals[3]),
    );
    if rng.gen_bool(0.3) {
        let k = rng.gen_range(0..4);
        let pool = [CUISINES, LOCATIONS, SIZES, PRICES][k];
        let new = *pool
            .iter()
            .filter(|v| **v != vals[k])
            .collect::<Vec<_>>()
            .choose(rng)
            .unwrap();
        let text = match k {
            0 => format!("instead could it be with {new} food"),
            1 => format!("actually i would prefer in {new}"),
            2 => format!("instead could it be for {new} people"),
            _ => format!("actually i would prefer in a {new} price range"),
        };
        vals[k] = new;
        d.push(&text, "sure is there anything else to update");
        d.push("no", "ok let me look into some options for you");
        d.push(
            "<SILENCE>",
            &format!("api_call {} {} {} {}", vals[0], vals[1], vals[2], vals[3]),
        );
    }
    let n = rng.gen_range(2..=5);
    let mut ratings: Vec<u32> = (1..=8).collect();
    ratings.shuffle(rng);
    let mut ratings: Vec<u32> = ratings.into_iter().take(n).collect();
    ratings.sort_unstable_by(|a, b| b.cmp(a));
    let names: Vec<String> = ratings
        .iter()
        .map(|r| format!("resto_{}_{}_{}_{}stars", vals[1], vals[3], vals[0], r))
        .collect();
    for (name, r) in names.iter().zip(&ratings) {
        for (attr, v) in [
            ("R_phone", format!("{name}_phone")),
            ("R_cuisine", vals[0].to_string()),
            ("R_address", format!("{name}_address")),
            ("R_location", vals[1].to_string()),
            ("R_number", vals[2].to_string()),
            ("R_price", vals[3].to_string()),
            ("R_rating", r.to_string()),
        ] {
            d.lines.push(format!("{name} {attr} {v}"));
        }
    }
    let rejections = match rng.gen_range(0..100) {
        0..=12 => 0,
        13..=55 => 1,
        56..=85 => 2,
        _ => 3,
    }
    .min(n - 1);
    for (i, name) in names.iter().enumerate().take(rejections + 1) {
        d.push(
            "<SILENCE>",
            &format!("what do you think of this option: {name}"),
        );
        if i < rejections {
            d.push(
                pick(
                    rng,
                    &[
                        "no this does not work for me",
                        "do you have something else",
                        "no i don't like that",
                    ],
                ),
                "sure let me find an other option for you",
            );
        }
    }
    let chosen = &names[rejections];
    d.push(
        pick(rng, &["let's do it", "that looks great", "i love that"]),
        "great let me do the reservation",
    );
    if rng.gen_bool(0.45) {
        d.push(
            pick(
                rng,
                &[
                    "may i have the phone number of the restaurant",
                    "what is the phone number of the restaurant",
                ],
            ),
            &format!("here it is {chosen}_phone"),
        );
    }
    if rng.gen_bool(0.4) {
        d.push(
            pick(
                rng,
                &["can you provide the address", "do you have its address"],
            ),
            &format!("here it is {chosen}_address"),
        );
    }
    d.push(
        pick(rng, &["thanks", "thank you", "you rock"]),
        "is there anything i can help you with",
    );
    d.push(pick(rng, &["no thank you", "no thanks"]), "you're welcome");
    d
}

fn babi_text(dialogs: &[BabiDialog]) -> String {
    let mut out = String::new();
    for d in dialogs {
        for (i, l) in d.lines.iter().enumerate() {
            out.push_str(&format!("{} {l}\n", i + 1));
        }
        out.push('\n');
    }
    out
}

/// `n` dialogs of the bAbI task-5 grammar, in the dialog-task text layout.
pub fn babi_corpus(seed: u64, n: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dialogs: Vec<BabiDialog> = (0..n).map(|_| babi_dialog(&mut rng)).collect();
    babi_text(&dialogs)
}

/// A numbered candidate file holding every agent response of `text`.
pub fn babi_candidates(text: &str) -> String {
    let mut seen = std::collections::HashSet::new();
    let mut out = String::new();
    let mut k = 0;
    for line in text.lines() {
        if let Some((_, agent)) = line.split_once('\t') {
            if seen.insert(agent.to_string()) {
                k += 1;
                out.push_str(&format!("{k} {agent}\n"));
            }
        }
    }
    out
}

/// The shipped SMD fixture (twelve dialogs).
pub const SMD_FIXTURE: &str = include_str!("../../../fixtures/smd_fixture.json");
/// The shipped bAbI fixture (twelve dialogs) and its candidate file.
pub const BABI_FIXTURE: &str = include_str!("../../../fixtures/babi_fixture.txt");
pub const BABI_FIXTURE_CANDIDATES: &str = include_str!("../../../fixtures/babi_candidates.txt");

pub fn smd_fixture() -> String {
    SMD_FIXTURE.to_string()
}

pub fn babi_fixture() -> String {
    BABI_FIXTURE.to_string()
}
