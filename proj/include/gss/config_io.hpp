#pragma once

// Text file formats: annotation and alignment lists, scene configs and
// pipeline configs, all stored as JSON documents.

#include <string>
#include <vector>

#include "gss/annotations.hpp"
#include "gss/scene.hpp"

namespace gss::io {

std::vector<UtteranceAnnotation> parse_annotations(const std::string& text);
std::vector<UtteranceAnnotation> read_annotations(const std::string& path);
std::string format_annotations(const std::vector<UtteranceAnnotation>& anns);
void write_annotations(const std::string& path, const std::vector<UtteranceAnnotation>& anns);

std::vector<AlignmentTrack> parse_alignment(const std::string& text);
std::vector<AlignmentTrack> read_alignment(const std::string& path);
std::string format_alignment(const std::vector<AlignmentTrack>& tracks);
void write_alignment(const std::string& path, const std::vector<AlignmentTrack>& tracks);

/// Missing keys keep their defaults; unknown keys and bad values raise
/// ConfigError naming the field.
SceneConfig parse_scene_config(const std::string& text);
SceneConfig read_scene_config(const std::string& path);
std::string format_scene_config(const SceneConfig& cfg);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace gss::io
