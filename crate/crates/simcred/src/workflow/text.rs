//! Reading and writing the workflow definition document format.
//!
//! The format is XML with a fixed vocabulary: a top-level `workflow` element
//! with `node` (children `port`, `param`), `edge` and `incentives` children.
//! `parse_workflow` is strict: unknown elements, malformed nesting, unknown
//! node kinds, duplicate ids and dangling references are all rejected, never
//! silently dropped.

use super::{
    Connective, Edge, EventKind, Node, NodeKind, Param, Port, WorkflowError, WorkflowGraph,
};
use quick_xml::events::{BytesDecl, BytesStart, Event};
use quick_xml::{Reader, Writer};

const DEFAULT_ESTIMATED_TIME: f64 = 30.0;

/// Parses a workflow definition document into a [`WorkflowGraph`].
pub fn parse_workflow(text: &str) -> Result<WorkflowGraph, WorkflowError> {
    let mut reader = Reader::from_str(text);
    let mut graph: Option<WorkflowGraph> = None;
    let mut current_node: Option<Node> = None;
    let mut pending_edges: Vec<Edge> = Vec::new();
    let mut open_elements: Vec<String> = Vec::new();
    let mut workflow_closed = false;

    loop {
        match reader.read_event() {
            Err(e) => {
                return Err(syntax_error(text, reader.error_position(), e.to_string()));
            }
            Ok(Event::Eof) => break,
            Ok(Event::Decl(_)) | Ok(Event::Comment(_)) | Ok(Event::PI(_)) | Ok(Event::DocType(_)) => {}
            Ok(Event::Text(t)) => {
                if !t.as_ref().iter().all(|b| b.is_ascii_whitespace()) {
                    return Err(syntax_error(
                        text,
                        reader.buffer_position(),
                        "unexpected text content".to_string(),
                    ));
                }
            }
            Ok(Event::CData(_)) => {
                return Err(syntax_error(
                    text,
                    reader.buffer_position(),
                    "unexpected CDATA section".to_string(),
                ));
            }
            Ok(Event::Start(start)) => {
                let name = element_name(&start);
                handle_element_open(
                    text,
                    &reader,
                    &start,
                    &name,
                    &mut graph,
                    &mut current_node,
                    &mut pending_edges,
                    workflow_closed,
                    &open_elements,
                )?;
                open_elements.push(name);
            }
            Ok(Event::Empty(start)) => {
                let name = element_name(&start);
                handle_element_open(
                    text,
                    &reader,
                    &start,
                    &name,
                    &mut graph,
                    &mut current_node,
                    &mut pending_edges,
                    workflow_closed,
                    &open_elements,
                )?;
                handle_element_close(&name, &mut graph, &mut current_node)?;
            }
            Ok(Event::End(end)) => {
                let name = String::from_utf8_lossy(end.name().as_ref()).into_owned();
                match open_elements.pop() {
                    Some(open) if open == name => {}
                    _ => {
                        return Err(syntax_error(
                            text,
                            reader.buffer_position(),
                            format!("mismatched closing tag `{name}`"),
                        ));
                    }
                }
                if name == "workflow" {
                    workflow_closed = true;
                }
                handle_element_close(&name, &mut graph, &mut current_node)?;
            }
        }
    }

    if !open_elements.is_empty() {
        return Err(syntax_error(
            text,
            reader.buffer_position(),
            format!("unclosed element `{}`", open_elements.last().unwrap()),
        ));
    }
    let mut graph = graph.ok_or_else(|| {
        syntax_error(text, 0, "document has no `workflow` element".to_string())
    })?;
    for edge in pending_edges {
        graph.add_edge(edge)?;
    }
    Ok(graph)
}

#[allow(clippy::too_many_arguments)]
fn handle_element_open(
    text: &str,
    reader: &Reader<&[u8]>,
    start: &BytesStart<'_>,
    name: &str,
    graph: &mut Option<WorkflowGraph>,
    current_node: &mut Option<Node>,
    pending_edges: &mut Vec<Edge>,
    workflow_closed: bool,
    open_elements: &[String],
) -> Result<(), WorkflowError> {
    let position = reader.buffer_position();
    let attrs = read_attributes(text, reader, start)?;
    let get = |key: &str| -> Option<&str> {
        attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };

    match name {
        "workflow" => {
            if graph.is_some() || workflow_closed {
                return Err(syntax_error(
                    text,
                    position,
                    "more than one `workflow` element".to_string(),
                ));
            }
            if !open_elements.is_empty() {
                return Err(syntax_error(
                    text,
                    position,
                    "`workflow` must be the root element".to_string(),
                ));
            }
            let wf_name = get("name").unwrap_or("").to_string();
            let estimated_time = match get("estimated-time") {
                None => DEFAULT_ESTIMATED_TIME,
                Some(raw) => raw.parse().map_err(|_| WorkflowError::InvalidAttribute {
                    element: "workflow",
                    attribute: "estimated-time",
                    value: raw.to_string(),
                })?,
            };
            *graph = Some(WorkflowGraph::new(wf_name, estimated_time));
        }
        "node" => {
            expect_parent(text, position, open_elements, "workflow", "node")?;
            if current_node.is_some() {
                return Err(syntax_error(
                    text,
                    position,
                    "`node` elements cannot be nested".to_string(),
                ));
            }
            let id = require(get("id"), "node", "id")?.to_string();
            let kind_raw = require(get("kind"), "node", "kind")?;
            let kind = match kind_raw {
                "active" => NodeKind::Active,
                "logical" => {
                    let conn = require(get("connective"), "node", "connective")?;
                    NodeKind::Logical(match conn {
                        "and" => Connective::And,
                        "or" => Connective::Or,
                        "nor" => Connective::Nor,
                        other => {
                            return Err(WorkflowError::InvalidAttribute {
                                element: "node",
                                attribute: "connective",
                                value: other.to_string(),
                            })
                        }
                    })
                }
                "event" => {
                    let ev = require(get("event-kind"), "node", "event-kind")?;
                    NodeKind::Event(match ev {
                        "start" => EventKind::Start,
                        "stimulate" => EventKind::Stimulate,
                        "end" => EventKind::End,
                        other => {
                            return Err(WorkflowError::InvalidAttribute {
                                element: "node",
                                attribute: "event-kind",
                                value: other.to_string(),
                            })
                        }
                    })
                }
                other => {
                    return Err(WorkflowError::UnknownNodeKind {
                        id,
                        kind: other.to_string(),
                    })
                }
            };
            let mut node = Node {
                id,
                kind,
                inputs: Vec::new(),
                outputs: Vec::new(),
                params: Vec::new(),
                linked_model: None,
            };
            if let Some(model) = get("linked-model") {
                if kind != NodeKind::Active {
                    return Err(WorkflowError::ElementNotAllowed {
                        node: node.id,
                        kind: kind_label(kind),
                        element: "linked-model",
                    });
                }
                node.linked_model = Some(model.to_string());
            }
            *current_node = Some(node);
        }
        "port" => {
            let node = current_node.as_mut().ok_or_else(|| {
                syntax_error(
                    text,
                    position,
                    "`port` must appear inside a `node`".to_string(),
                )
            })?;
            if node.kind != NodeKind::Active {
                return Err(WorkflowError::ElementNotAllowed {
                    node: node.id.clone(),
                    kind: kind_label(node.kind),
                    element: "port",
                });
            }
            let direction = require(get("direction"), "port", "direction")?;
            let port = Port {
                name: require(get("name"), "port", "name")?.to_string(),
                type_tag: require(get("type-tag"), "port", "type-tag")?.to_string(),
            };
            match direction {
                "in" => node.inputs.push(port),
                "out" => node.outputs.push(port),
                other => {
                    return Err(WorkflowError::InvalidAttribute {
                        element: "port",
                        attribute: "direction",
                        value: other.to_string(),
                    })
                }
            }
        }
        "param" => {
            let node = current_node.as_mut().ok_or_else(|| {
                syntax_error(
                    text,
                    position,
                    "`param` must appear inside a `node`".to_string(),
                )
            })?;
            if node.kind != NodeKind::Active {
                return Err(WorkflowError::ElementNotAllowed {
                    node: node.id.clone(),
                    kind: kind_label(node.kind),
                    element: "param",
                });
            }
            let required = match get("required") {
                None => false,
                Some("true") => true,
                Some("false") => false,
                Some(other) => {
                    return Err(WorkflowError::InvalidAttribute {
                        element: "param",
                        attribute: "required",
                        value: other.to_string(),
                    })
                }
            };
            node.params.push(Param {
                name: require(get("name"), "param", "name")?.to_string(),
                required,
                value: get("value").map(str::to_string),
            });
        }
        "edge" => {
            expect_parent(text, position, open_elements, "workflow", "edge")?;
            pending_edges.push(Edge {
                from: require(get("from"), "edge", "from")?.to_string(),
                from_port: get("from-port").map(str::to_string),
                to: require(get("to"), "edge", "to")?.to_string(),
                to_port: get("to-port").map(str::to_string),
            });
        }
        "incentives" => {
            expect_parent(text, position, open_elements, "workflow", "incentives")?;
            let g = graph.as_mut().expect("workflow element open");
            let para: u32 = parse_attr(require(get("para"), "incentives", "para")?, "incentives", "para")?;
            let ex_para: u32 =
                parse_attr(require(get("ex-para"), "incentives", "ex-para")?, "incentives", "ex-para")?;
            g.set_incentives(para, ex_para);
        }
        other => {
            return Err(syntax_error(
                text,
                position,
                format!("unknown element `{other}`"),
            ));
        }
    }
    Ok(())
}

fn element_name(start: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(start.name().as_ref()).into_owned()
}

fn handle_element_close(
    name: &str,
    graph: &mut Option<WorkflowGraph>,
    current_node: &mut Option<Node>,
) -> Result<(), WorkflowError> {
    if name == "node" {
        let node = current_node.take().expect("node element was open");
        graph
            .as_mut()
            .expect("workflow element open")
            .add_node(node)?;
    }
    Ok(())
}

fn expect_parent(
    text: &str,
    position: u64,
    open_elements: &[String],
    parent: &str,
    child: &str,
) -> Result<(), WorkflowError> {
    if open_elements.last().map(String::as_str) != Some(parent) {
        return Err(syntax_error(
            text,
            position,
            format!("`{child}` must appear directly inside `{parent}`"),
        ));
    }
    Ok(())
}

fn read_attributes(
    text: &str,
    reader: &Reader<&[u8]>,
    start: &BytesStart<'_>,
) -> Result<Vec<(String, String)>, WorkflowError> {
    let mut out = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| {
            syntax_error(text, reader.buffer_position(), format!("bad attribute: {e}"))
        })?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| {
                syntax_error(
                    text,
                    reader.buffer_position(),
                    format!("bad attribute value: {e}"),
                )
            })?
            .into_owned();
        out.push((key, value));
    }
    Ok(out)
}

fn require<'a>(
    value: Option<&'a str>,
    element: &'static str,
    attribute: &'static str,
) -> Result<&'a str, WorkflowError> {
    value.ok_or(WorkflowError::MissingAttribute { element, attribute })
}

fn parse_attr<T: std::str::FromStr>(
    raw: &str,
    element: &'static str,
    attribute: &'static str,
) -> Result<T, WorkflowError> {
    raw.parse().map_err(|_| WorkflowError::InvalidAttribute {
        element,
        attribute,
        value: raw.to_string(),
    })
}

fn kind_label(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Active => "active",
        NodeKind::Logical(_) => "logical",
        NodeKind::Event(_) => "event",
    }
}

fn syntax_error(text: &str, byte_position: u64, message: String) -> WorkflowError {
    let pos = (byte_position as usize).min(text.len());
    let prefix = &text[..pos];
    let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
    let column = pos - prefix.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    WorkflowError::Syntax {
        line,
        column,
        message,
    }
}

/// Serializes a graph back to the canonical definition document.
///
/// Node, edge and parameter order is preserved, so `parse(serialize(g))`
/// reproduces `g` exactly.
pub fn serialize_workflow(graph: &WorkflowGraph) -> String {
    let mut writer = Writer::new_with_indent(Vec::new(), b' ', 2);
    writer
        .write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .expect("in-memory write");

    let mut root = BytesStart::new("workflow");
    if !graph.name.is_empty() {
        root.push_attribute(("name", graph.name.as_str()));
    }
    root.push_attribute(("estimated-time", format!("{}", graph.estimated_time).as_str()));
    writer
        .write_event(Event::Start(root))
        .expect("in-memory write");

    for node in graph.nodes() {
        let mut elem = BytesStart::new("node");
        elem.push_attribute(("id", node.id.as_str()));
        match node.kind {
            NodeKind::Active => elem.push_attribute(("kind", "active")),
            NodeKind::Logical(c) => {
                elem.push_attribute(("kind", "logical"));
                elem.push_attribute(("connective", c.as_str()));
            }
            NodeKind::Event(k) => {
                elem.push_attribute(("kind", "event"));
                elem.push_attribute(("event-kind", k.as_str()));
            }
        }
        if let Some(model) = &node.linked_model {
            elem.push_attribute(("linked-model", model.as_str()));
        }
        let leaf = node.inputs.is_empty() && node.outputs.is_empty() && node.params.is_empty();
        if leaf {
            writer
                .write_event(Event::Empty(elem))
                .expect("in-memory write");
            continue;
        }
        writer
            .write_event(Event::Start(elem))
            .expect("in-memory write");
        for (direction, ports) in [("in", &node.inputs), ("out", &node.outputs)] {
            for port in ports {
                let mut p = BytesStart::new("port");
                p.push_attribute(("direction", direction));
                p.push_attribute(("name", port.name.as_str()));
                p.push_attribute(("type-tag", port.type_tag.as_str()));
                writer.write_event(Event::Empty(p)).expect("in-memory write");
            }
        }
        for param in &node.params {
            let mut p = BytesStart::new("param");
            p.push_attribute(("name", param.name.as_str()));
            p.push_attribute(("required", if param.required { "true" } else { "false" }));
            if let Some(value) = &param.value {
                p.push_attribute(("value", value.as_str()));
            }
            writer.write_event(Event::Empty(p)).expect("in-memory write");
        }
        writer
            .write_event(Event::End(BytesStart::new("node").to_end()))
            .expect("in-memory write");
    }

    for edge in graph.edges() {
        let mut e = BytesStart::new("edge");
        e.push_attribute(("from", edge.from.as_str()));
        if let Some(port) = &edge.from_port {
            e.push_attribute(("from-port", port.as_str()));
        }
        e.push_attribute(("to", edge.to.as_str()));
        if let Some(port) = &edge.to_port {
            e.push_attribute(("to-port", port.as_str()));
        }
        writer.write_event(Event::Empty(e)).expect("in-memory write");
    }

    let mut inc = BytesStart::new("incentives");
    inc.push_attribute(("para", graph.incentive_params.to_string().as_str()));
    inc.push_attribute(("ex-para", graph.external_incentive_params.to_string().as_str()));
    writer.write_event(Event::Empty(inc)).expect("in-memory write");

    writer
        .write_event(Event::End(BytesStart::new("workflow").to_end()))
        .expect("in-memory write");

    let mut bytes = writer.into_inner();
    bytes.push(b'\n');
    String::from_utf8(bytes).expect("writer produces UTF-8")
}
