//! Deterministic assembly of the information packet from search results
//! and instructor materials.

use gateways::SearchResult;

use crate::types::{InformationPacket, MaterialSet, Snippet, Topic};

pub const SNIPPET_MAX_CHARS: usize = 1000;

/// One topic per query, in query order; snippets capped; image URLs
/// deduplicated across the whole packet preserving first-seen order;
/// material names carried through verbatim.
pub fn assemble_packet(
    results: &[(String, Vec<SearchResult>)],
    materials: &MaterialSet,
) -> InformationPacket {
    let mut seen_images = std::collections::HashSet::new();
    let topics = results
        .iter()
        .map(|(query, hits)| {
            let snippets = hits
                .iter()
                .map(|hit| Snippet {
                    text: cap_chars(&hit.snippet, SNIPPET_MAX_CHARS),
                    source: hit.url.clone(),
                })
                .collect();
            let image_urls = hits
                .iter()
                .flat_map(|hit| hit.image_urls.iter())
                .filter(|url| seen_images.insert((*url).clone()))
                .cloned()
                .collect();
            Topic {
                label: query.clone(),
                snippets,
                image_urls,
            }
        })
        .collect();
    InformationPacket {
        topics,
        material_refs: materials.items.iter().map(|m| m.name.clone()).collect(),
    }
}

fn cap_chars(text: &str, cap: usize) -> String {
    if text.chars().count() <= cap {
        text.to_string()
    } else {
        text.chars().take(cap).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{MaterialItem, MaterialKind};

    fn hit(url: &str, snippet: &str, images: &[&str]) -> SearchResult {
        SearchResult {
            title: "t".into(),
            url: url.into(),
            snippet: snippet.into(),
            image_urls: images.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn one_topic_per_query_with_all_snippets() {
        let results = vec![(
            "q1".to_string(),
            vec![hit("https://a", "first", &[]), hit("https://b", "second", &[])],
        )];
        let packet = assemble_packet(&results, &MaterialSet::default());
        assert_eq!(packet.topics.len(), 1);
        assert_eq!(packet.topics[0].snippets.len(), 2);
        assert_eq!(packet.topics[0].snippets[0].source, "https://a");
    }

    #[test]
    fn materials_ride_along_without_topics() {
        let materials = MaterialSet {
            items: vec![MaterialItem {
                name: "syllabus".into(),
                kind: MaterialKind::Text,
                content: "week 1".into(),
            }],
        };
        let packet = assemble_packet(&[], &materials);
        assert!(packet.topics.is_empty());
        assert_eq!(packet.material_refs, vec!["syllabus"]);
    }

    #[test]
    fn duplicate_image_urls_appear_once() {
        let results = vec![
            ("q1".to_string(), vec![hit("https://a", "x", &["https://img/1.png"])]),
            (
                "q2".to_string(),
                vec![hit("https://b", "y", &["https://img/1.png", "https://img/2.png"])],
            ),
        ];
        let packet = assemble_packet(&results, &MaterialSet::default());
        let all: Vec<&String> = packet.topics.iter().flat_map(|t| t.image_urls.iter()).collect();
        assert_eq!(all, vec!["https://img/1.png", "https://img/2.png"]);
    }

    #[test]
    fn snippets_are_capped_at_the_budget() {
        let long = "s".repeat(2500);
        let results = vec![("q".to_string(), vec![hit("https://a", &long, &[])])];
        let packet = assemble_packet(&results, &MaterialSet::default());
        assert_eq!(packet.topics[0].snippets[0].text.chars().count(), SNIPPET_MAX_CHARS);
    }
}
