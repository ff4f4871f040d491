use std::collections::BTreeMap;

use super::value::parse_value_at;
use super::{
    AnalysisSpec, Card, Circuit, DeviceInstance, DeviceKind, Drive, NetlistError, ParseError,
    RawDeck, Token, DEFAULT_TEMP_C,
};
use crate::devices::{MosModel, Polarity, PulseSpec};

/// Sanity window for MOSFET aspect ratio.
pub const MOS_ASPECT_RANGE: (f64, f64) = (0.1, 1000.0);

/// Build a validated [`Circuit`] from parsed cards.
///
/// Node indices follow first appearance in the deck. `.model` cards may
/// appear anywhere.
pub fn elaborate(deck: &RawDeck) -> Result<Circuit, NetlistError> {
    let mut models = BTreeMap::new();
    for card in deck.cards.iter().filter(|c| c.keyword().eq_ignore_ascii_case(".model")) {
        let (name, model) = model_card(card)?;
        models.insert(name, model);
    }

    let mut b = Builder {
        node_names: vec!["0".to_string()],
    };
    let mut devices = Vec::new();
    let mut analyses = Vec::new();
    let mut diagnostics = Vec::new();
    let mut global_temp = DEFAULT_TEMP_C;

    for card in &deck.cards {
        let kw = card.keyword().to_ascii_lowercase();
        match kw.as_str() {
            ".model" => {}
            ".tran" => {
                let (t_step, t_stop) = tran_card(card)?;
                if let Some(pos) = analyses
                    .iter()
                    .position(|a| matches!(a, AnalysisSpec::Tran { .. }))
                {
                    diagnostics.push(format!(
                        "line {}: .tran replaces an earlier .tran card",
                        card.line
                    ));
                    analyses.remove(pos);
                }
                analyses.push(AnalysisSpec::Tran { t_step, t_stop });
            }
            ".temp" => {
                expect_len(card, 2)?;
                let celsius = num(&card.tokens[1])?;
                global_temp = celsius;
                analyses.push(AnalysisSpec::Temp { celsius });
            }
            ".op" => analyses.push(AnalysisSpec::DcOp),
            k if k.starts_with('.') => {
                return Err(ParseError::new(
                    card.line,
                    card.tokens[0].column,
                    format!("unsupported directive `{}`", card.tokens[0].text),
                )
                .into())
            }
            _ => {
                let dev = b.device(card, &models)?;
                devices.push(dev);
            }
        }
    }

    let circuit = Circuit {
        title: deck.title.clone(),
        node_names: b.node_names,
        devices,
        models,
        analyses,
        global_temp,
        diagnostics,
    };
    check_topology(&circuit)?;
    Ok(circuit)
}

struct Builder {
    node_names: Vec<String>,
}

impl Builder {
    fn node(&mut self, tok: &Token) -> usize {
        let name = tok.text.to_ascii_lowercase();
        if name == "0" || name == "gnd" {
            return 0;
        }
        match self.node_names.iter().position(|n| *n == name) {
            Some(i) => i,
            None => {
                self.node_names.push(name);
                self.node_names.len() - 1
            }
        }
    }

    fn device(
        &mut self,
        card: &Card,
        models: &BTreeMap<String, MosModel>,
    ) -> Result<DeviceInstance, NetlistError> {
        let name = card.tokens[0].text.clone();
        let invalid = |reason: String| NetlistError::InvalidDevice {
            device: name.clone(),
            line: card.line,
            reason,
        };
        let t = &card.tokens;
        let lead = name.as_bytes()[0].to_ascii_lowercase();
        let kind = match lead {
            b'r' | b'c' => {
                expect_len(card, 4)?;
                let a = self.node(&t[1]);
                let bn = self.node(&t[2]);
                let v = num(&t[3])?;
                if !(v > 0.0) {
                    return Err(invalid(format!("value must be positive, got {v}")));
                }
                if lead == b'r' {
                    DeviceKind::Resistor { a, b: bn, ohms: v }
                } else {
                    DeviceKind::Capacitor { a, b: bn, farads: v }
                }
            }
            b'v' => {
                if t.len() < 4 {
                    return Err(short(card));
                }
                let pos = self.node(&t[1]);
                let neg = self.node(&t[2]);
                let drive = match t[3].text.to_ascii_lowercase().as_str() {
                    "dc" => {
                        expect_len(card, 5)?;
                        Drive::Dc(num(&t[4])?)
                    }
                    "pulse" => {
                        expect_len(card, 11)?;
                        let v: Vec<f64> = t[4..11].iter().map(num).collect::<Result<_, _>>()?;
                        let p = PulseSpec {
                            v1: v[0],
                            v2: v[1],
                            t_delay: v[2],
                            t_rise: v[3],
                            t_fall: v[4],
                            t_pw: v[5],
                            t_period: v[6],
                        };
                        p.validate().map_err(invalid)?;
                        Drive::Pulse(p)
                    }
                    _ => {
                        expect_len(card, 4)?;
                        Drive::Dc(num(&t[3])?)
                    }
                };
                if pos == neg {
                    return Err(invalid("source terminals are the same node".into()));
                }
                DeviceKind::VSource { pos, neg, drive }
            }
            b'm' => {
                if t.len() < 6 {
                    return Err(short(card));
                }
                let model = t[5].text.to_ascii_lowercase();
                if !models.contains_key(&model) {
                    return Err(NetlistError::UnknownModel {
                        device: name.clone(),
                        model,
                        line: card.line,
                    });
                }
                let params = key_values(&t[6..], card)?;
                let mut w = None;
                let mut l = None;
                for (k, v) in params {
                    match k.text.to_ascii_lowercase().as_str() {
                        "w" => w = Some(v),
                        "l" => l = Some(v),
                        _ => {
                            return Err(ParseError::new(
                                k.line,
                                k.column,
                                format!("unknown MOSFET parameter `{}`", k.text),
                            )
                            .into())
                        }
                    }
                }
                let (Some(w), Some(l)) = (w, l) else {
                    return Err(invalid("MOSFET needs both W= and L=".into()));
                };
                if !(w > 0.0 && l > 0.0) {
                    return Err(invalid("W and L must be positive".into()));
                }
                let ratio = w / l;
                if ratio < MOS_ASPECT_RANGE.0 || ratio > MOS_ASPECT_RANGE.1 {
                    return Err(invalid(format!(
                        "W/L = {ratio} outside [{}, {}]",
                        MOS_ASPECT_RANGE.0, MOS_ASPECT_RANGE.1
                    )));
                }
                DeviceKind::Mosfet {
                    drain: self.node(&t[1]),
                    gate: self.node(&t[2]),
                    source: self.node(&t[3]),
                    bulk: self.node(&t[4]),
                    model,
                    w,
                    l,
                }
            }
            _ => {
                return Err(ParseError::new(
                    card.line,
                    t[0].column,
                    format!("unsupported element `{name}`"),
                )
                .into())
            }
        };
        Ok(DeviceInstance { name, kind })
    }
}

fn model_card(card: &Card) -> Result<(String, MosModel), NetlistError> {
    let t = &card.tokens;
    if t.len() < 3 {
        return Err(short(card));
    }
    let name = t[1].text.to_ascii_lowercase();
    let mut model = match t[2].text.to_ascii_lowercase().as_str() {
        "nmos" => MosModel::default_for(Polarity::N),
        "pmos" => MosModel::default_for(Polarity::P),
        other => {
            return Err(ParseError::new(
                card.line,
                t[2].column,
                format!("model type must be nmos or pmos, got `{other}`"),
            )
            .into())
        }
    };
    for (k, v) in key_values(&t[3..], card)? {
        model
            .set_param(&k.text, v)
            .map_err(|m| ParseError::new(k.line, k.column, m))?;
    }
    model.validate().map_err(|reason| NetlistError::InvalidDirective {
        line: card.line,
        reason: format!("model `{name}`: {reason}"),
    })?;
    Ok((name, model))
}

fn tran_card(card: &Card) -> Result<(f64, f64), NetlistError> {
    expect_len(card, 3)?;
    let t_step = num(&card.tokens[1])?;
    let t_stop = num(&card.tokens[2])?;
    if !(t_step > 0.0 && t_stop > t_step) {
        return Err(NetlistError::InvalidDirective {
            line: card.line,
            reason: format!(".tran needs 0 < tstep < tstop, got {t_step} {t_stop}"),
        });
    }
    Ok((t_step, t_stop))
}

fn key_values<'a>(toks: &'a [Token], card: &Card) -> Result<Vec<(&'a Token, f64)>, ParseError> {
    if toks.len() % 3 != 0 {
        return Err(ParseError::new(
            card.line,
            toks.first().map_or(1, |t| t.column),
            "expected key=value pairs",
        ));
    }
    toks.chunks(3)
        .map(|c| {
            if c[1].text != "=" {
                return Err(ParseError::new(c[1].line, c[1].column, "expected `=`"));
            }
            Ok((&c[0], num(&c[2])?))
        })
        .collect()
}

fn num(t: &Token) -> Result<f64, ParseError> {
    parse_value_at(&t.text, t.line, t.column)
}

fn expect_len(card: &Card, n: usize) -> Result<(), ParseError> {
    if card.tokens.len() != n {
        let last = card.tokens.last().unwrap();
        return Err(ParseError::new(
            last.line,
            last.column,
            format!(
                "`{}` card expects {} fields, found {}",
                card.keyword(),
                n,
                card.tokens.len()
            ),
        ));
    }
    Ok(())
}

fn short(card: &Card) -> NetlistError {
    let last = card.tokens.last().unwrap();
    ParseError::new(
        last.line,
        last.column,
        format!("`{}` card is missing fields", card.keyword()),
    )
    .into()
}

fn check_topology(c: &Circuit) -> Result<(), NetlistError> {
    let n = c.node_count();
    let mut incidence = vec![0usize; n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for d in &c.devices {
        let terms = d.terminals();
        for &t in &terms {
            incidence[t] += 1;
        }
        // The bulk is electrically inert and does not join nodes.
        let joined = match d.kind {
            DeviceKind::Mosfet { .. } => &terms[..3],
            _ => &terms[..],
        };
        for w in joined.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    for i in 1..n {
        if incidence[i] < 2 {
            return Err(NetlistError::FloatingNode {
                node: c.node_names[i].clone(),
            });
        }
    }
    let ground = find(&mut parent, 0);
    for i in 1..n {
        if find(&mut parent, i) != ground {
            return Err(NetlistError::Disconnected {
                node: c.node_names[i].clone(),
            });
        }
    }
    Ok(())
}
