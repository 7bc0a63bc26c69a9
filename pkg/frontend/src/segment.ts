/**
 * Client-side mirror of the server's tokenizer and sentence segmenter.
 *
 * The rules must stay byte-for-byte compatible with the service so the
 * editor's passage preview and live term counter agree with what the
 * server will accept; a shared fixture test pins both sides.
 */

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
}

export function countTerms(text: string): number {
  return tokenize(text).length;
}

/** Sentences end at a run of . ! ? followed by whitespace or end of text. */
export function segmentPassages(text: string): string[] {
  if (text.trim() === "") {
    throw new Error("cannot segment empty text");
  }
  const passages: string[] = [];
  const sentenceEnd = /[.!?]+(?=\s|$)/g;
  let start = 0;
  let match: RegExpExecArray | null;
  while ((match = sentenceEnd.exec(text)) !== null) {
    const end = match.index + match[0].length;
    const chunk = text.slice(start, end).trim();
    if (chunk) {
      passages.push(chunk);
    }
    start = end;
  }
  const tail = text.slice(start).trim();
  if (tail) {
    passages.push(tail);
  }
  return passages;
}
