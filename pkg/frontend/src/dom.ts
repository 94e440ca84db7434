type Tag = keyof HTMLElementTagNameMap;
type TagOf<S> = S extends `${infer T}.${string}` ? T : S;

/** Tiny element builder: el("button.submit", { type: "button" }, "Submit"). */
export function el<S extends Tag | `${Tag}.${string}`>(
  spec: S,
  props: Record<string, unknown> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[TagOf<S> & Tag] {
  const [tag, ...classes] = spec.split(".");
  const node = document.createElement(tag);
  if (classes.length) node.className = classes.join(" ");
  Object.assign(node, props);
  node.append(...children);
  return node as HTMLElementTagNameMap[TagOf<S> & Tag];
}
