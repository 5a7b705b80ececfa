/** Collapsible ontology tree rendered as nested <details> elements, with
 * the session cursor and any newly inserted branch highlighted. */

import type { TreeDump, TreeNode } from "./api.js";

export interface TreeViewOptions {
  cursor?: string | null;
  highlight?: string[];
  openDepth?: number;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function nodeClasses(node: TreeNode, options: TreeViewOptions): string {
  const classes = ["topic"];
  if (options.cursor === node.topic) {
    classes.push("cursor");
  }
  if (options.highlight?.includes(node.topic)) {
    classes.push("inserted");
  }
  return classes.join(" ");
}

export function renderTree(dump: TreeDump, options: TreeViewOptions = {}): string {
  const byTopic = new Map(dump.nodes.map((n) => [n.topic, n]));
  const openDepth = options.openDepth ?? 2;

  const renderNode = (topic: string, depth: number): string => {
    const node = byTopic.get(topic);
    if (!node) {
      return "";
    }
    const label = `<span class="${nodeClasses(node, options)}" data-topic="${escapeHtml(
      node.topic,
    )}">${escapeHtml(node.display)}</span>`;
    if (node.children.length === 0) {
      return `<li>${label}</li>`;
    }
    const children = node.children
      .map((child) => renderNode(child, depth + 1))
      .join("");
    const open = depth < openDepth ? " open" : "";
    return `<li><details${open}><summary>${label}</summary><ul>${children}</ul></details></li>`;
  };

  return `<ul class="tree">${renderNode(dump.root, 0)}</ul>`;
}
