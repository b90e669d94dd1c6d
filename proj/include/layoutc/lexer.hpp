#pragma once

#include <string>
#include <vector>

#include "layoutc/diag.hpp"

namespace layoutc {

enum class Tok {
  End,
  Ident,
  Int,      // value in int_val; bin/dec
  Float,
  // punctuation
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, Colon, Dot, Arrow, Pipe, Underscore,
  Assign, Plus, Minus, Star, Slash, Percent,
  Amp, PipePipe, AmpAmp, Caret, Not, Tilde,
  Eq, Ne, Lt, Gt, Le, Ge, Shl, Shr,
  Separator,  // ---
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  uint64_t int_val = 0;
  double float_val = 0.0;
  std::string suffix;  // numeric suffix: u, u8, i32, f32 ...
  Span span;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diags;
};

LexResult lex(const std::string& text, int file_id);

}  // namespace layoutc
