/** HTTP helpers: multipart upload and URL construction. */

export interface UploadMeta {
  annotation?: string
  authors?: string[]
}

export interface UploadResult {
  anchor: string
  width: number
  height: number
  image_url: string
  [key: string]: unknown
}

export async function uploadImage(
  baseUrl: string,
  file: Blob,
  meta: UploadMeta = {},
  fetchImpl: typeof fetch = fetch,
): Promise<UploadResult> {
  const form = new FormData()
  form.append('image', file)
  form.append('annotation', meta.annotation ?? '')
  form.append('authors', (meta.authors ?? []).join(', '))
  const response = await fetchImpl(`${baseUrl}/upload`, { method: 'POST', body: form })
  const body = await response.json()
  if (!response.ok) {
    const error = (body as any)?.error
    throw new Error(error?.message ?? `upload failed with status ${response.status}`)
  }
  return body as UploadResult
}

export function sketchSvgUrl(baseUrl: string, anchor: string): string {
  return `${baseUrl}/sketch/${anchor}.svg`
}

export function imageUrl(baseUrl: string, imageUrlPath: string): string {
  return `${baseUrl}${imageUrlPath}`
}

export interface HashTarget {
  sketch?: string
  link?: string
}

/** Deep links: /app#sketch=<anchor> opens a sketch, /app#link=<anchor> preloads the picker. */
export function parseHashTarget(hash: string): HashTarget {
  const target: HashTarget = {}
  const body = hash.startsWith('#') ? hash.slice(1) : hash
  for (const part of body.split('&')) {
    const [key, value] = part.split('=', 2)
    if (key === 'sketch' && value) target.sketch = value
    if (key === 'link' && value) target.link = value
  }
  return target
}
