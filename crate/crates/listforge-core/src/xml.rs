//! Minimal XML element tree used by the store: quick-xml for reading,
//! a hand-rolled writer for byte-deterministic output.

use quick_xml::events::Event;
use quick_xml::Reader;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlNode {
    Element(XmlElement),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlNode>,
}

impl XmlElement {
    pub fn new(name: &str) -> Self {
        XmlElement {
            name: name.to_string(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn attr(mut self, key: &str, value: &str) -> Self {
        self.attrs.push((key.to_string(), value.to_string()));
        self
    }

    pub fn child(mut self, element: XmlElement) -> Self {
        self.children.push(XmlNode::Element(element));
        self
    }

    pub fn text(mut self, text: &str) -> Self {
        self.children.push(XmlNode::Text(text.to_string()));
        self
    }

    /// Leaf element holding a single text node.
    pub fn leaf(name: &str, text: &str) -> Self {
        XmlElement::new(name).text(text)
    }

    /// Element name with any namespace prefix stripped.
    pub fn local_name(&self) -> &str {
        match self.name.split_once(':') {
            Some((_, local)) => local,
            None => &self.name,
        }
    }

    pub fn get_attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key || k.split_once(':').map(|(_, l)| l) == Some(key))
            .map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &XmlElement> {
        self.children.iter().filter_map(|n| match n {
            XmlNode::Element(e) => Some(e),
            XmlNode::Text(_) => None,
        })
    }

    pub fn find(&self, local: &str) -> Option<&XmlElement> {
        self.elements().find(|e| e.local_name() == local)
    }

    pub fn find_all<'a>(&'a self, local: &'a str) -> impl Iterator<Item = &'a XmlElement> {
        self.elements().filter(move |e| e.local_name() == local)
    }

    /// Concatenated text content of direct text children.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        for node in &self.children {
            if let XmlNode::Text(t) = node {
                out.push_str(t);
            }
        }
        out
    }

    fn has_element_children(&self) -> bool {
        self.elements().next().is_some()
    }

    fn write_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        out.push_str(&pad);
        out.push('<');
        out.push_str(&self.name);
        for (k, v) in &self.attrs {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            out.push_str(&escape(v, true));
            out.push('"');
        }
        if self.children.is_empty() {
            out.push_str("/>\n");
            return;
        }
        if self.has_element_children() {
            out.push_str(">\n");
            for node in &self.children {
                match node {
                    XmlNode::Element(e) => e.write_into(out, depth + 1),
                    // mixed content is not produced by the store; keep any
                    // text on its own padded line
                    XmlNode::Text(t) => {
                        if !t.trim().is_empty() {
                            out.push_str(&"  ".repeat(depth + 1));
                            out.push_str(&escape(t, false));
                            out.push('\n');
                        }
                    }
                }
            }
            out.push_str(&pad);
        } else {
            out.push('>');
            for node in &self.children {
                if let XmlNode::Text(t) = node {
                    out.push_str(&escape(t, false));
                }
            }
        }
        out.push_str("</");
        out.push_str(&self.name);
        out.push_str(">\n");
    }

    /// Renders this element (without the XML declaration).
    pub fn render_fragment(&self) -> String {
        let mut out = String::new();
        self.write_into(&mut out, 0);
        out
    }
}

/// Renders a full document with declaration, UTF-8, trailing newline.
pub fn render_document(root: &XmlElement) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.write_into(&mut out, 0);
    out
}

/// Escapes text content for embedding in an XML/SVG document.
pub fn escape_text(s: &str) -> String {
    escape(s, false)
}

fn escape(s: &str, in_attr: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if in_attr => out.push_str("&quot;"),
            // keep carriage returns through parser line-ending normalization
            '\r' => out.push_str("&#13;"),
            '\n' if in_attr => out.push_str("&#10;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parses a document into its root element. Whitespace-only text between
/// element children is dropped; text inside leaf elements is kept verbatim.
pub fn parse_document(src: &str) -> Result<XmlElement, (usize, String)> {
    let mut reader = Reader::from_str(src);
    let line_of = |pos: usize| src[..pos.min(src.len())].matches('\n').count() + 1;

    let mut stack: Vec<XmlElement> = Vec::new();
    let mut root: Option<XmlElement> = None;

    loop {
        let pos = reader.buffer_position() as usize;
        match reader.read_event() {
            Err(e) => return Err((line_of(pos), e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(start)) => {
                let mut element =
                    XmlElement::new(&String::from_utf8_lossy(start.name().as_ref()));
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| (line_of(pos), e.to_string()))?;
                    let key = String::from_utf8_lossy(attr.key.as_ref()).to_string();
                    let value = attr
                        .unescape_value()
                        .map_err(|e| (line_of(pos), e.to_string()))?
                        .to_string();
                    element.attrs.push((key, value));
                }
                stack.push(element);
            }
            Ok(Event::Empty(start)) => {
                let mut element =
                    XmlElement::new(&String::from_utf8_lossy(start.name().as_ref()));
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| (line_of(pos), e.to_string()))?;
                    let key = String::from_utf8_lossy(attr.key.as_ref()).to_string();
                    let value = attr
                        .unescape_value()
                        .map_err(|e| (line_of(pos), e.to_string()))?
                        .to_string();
                    element.attrs.push((key, value));
                }
                attach(&mut stack, &mut root, element);
            }
            Ok(Event::End(_)) => {
                let mut element = match stack.pop() {
                    Some(e) => e,
                    None => return Err((line_of(pos), "unbalanced end tag".into())),
                };
                if element.has_element_children() {
                    element.children.retain(|n| match n {
                        XmlNode::Text(t) => !t.trim().is_empty(),
                        XmlNode::Element(_) => true,
                    });
                }
                attach(&mut stack, &mut root, element);
            }
            Ok(Event::Text(text)) => {
                let value = text
                    .unescape()
                    .map_err(|e| (line_of(pos), e.to_string()))?
                    .to_string();
                if let Some(top) = stack.last_mut() {
                    top.children.push(XmlNode::Text(value));
                }
            }
            Ok(Event::CData(data)) => {
                let value = String::from_utf8_lossy(&data).to_string();
                if let Some(top) = stack.last_mut() {
                    top.children.push(XmlNode::Text(value));
                }
            }
            Ok(Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_)) => {}
        }
    }

    if !stack.is_empty() {
        return Err((line_of(src.len()), "unexpected end of document".into()));
    }
    root.ok_or((1, "document has no root element".into()))
}

fn attach(stack: &mut Vec<XmlElement>, root: &mut Option<XmlElement>, element: XmlElement) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(XmlNode::Element(element)),
        None => {
            if root.is_none() {
                *root = Some(element);
            }
        }
    }
}
