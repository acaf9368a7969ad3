/**
 * The sketch web app: upload/capture, draw rectangular markers, annotate,
 * link to source artifacts, and trigger editor navigation. All data flows
 * through the documented server protocol; no private channels.
 */

import { uploadImage, parseHashTarget, sketchSvgUrl } from './api.js'
import { LinkClient, ProtocolError, browserSocketFactory, defaultWsUrl } from './protocol.js'
import {
  Drag,
  dragToImageRect,
  displayScale,
  isRealDrag,
  rectToDisplay,
  validateRect,
} from './selection.js'

interface MarkerJson {
  anchor: string
  x: number
  y: number
  w: number
  h: number
  annotation: string
}

interface DocJson {
  anchor: string
  image_url: string
  width: number
  height: number
  annotation: string
  authors: string[]
  modified: string
  markers: MarkerJson[]
}

interface LinkEntry {
  peer: string
  peer_kind: string
  source?: { project: string; path: string; referent_kind: string; artifact_path: string }
  sketch?: { annotation: string }
}

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector)
  if (!el) throw new Error(`missing element ${selector}`)
  return el as T
}

class App {
  client = new LinkClient(browserSocketFactory(defaultWsUrl(window.location)))
  current: DocJson | null = null
  selectedMarker: string | null = null
  pendingLinkAnchor: string | null = null

  banner = $('#banner')
  sketchList = $('#sketch-list')
  stage = $('#stage')
  image = $('#sketch-image') as HTMLImageElement
  overlay = $('#overlay')
  detail = $('#detail')

  async start(): Promise<void> {
    this.client.enableReconnect(1500)
    this.client.onStatus((up) => this.showBanner(up ? '' : 'connection lost, reconnecting…'))
    this.client.onEvent((ev) => {
      if (ev.event === 'sketch_changed' || ev.event === 'link_changed') {
        void this.refreshList()
        if (this.current && (ev as any).anchor === this.current.anchor) {
          void this.openSketch(this.current.anchor)
        } else if (ev.event === 'link_changed' && this.current) {
          void this.renderDetail()
        }
      }
    })
    await this.client.connect()
    await this.client.subscribe(['sketches', 'links'])
    this.wireUpload()
    this.wireStage()
    await this.refreshList()

    const target = parseHashTarget(window.location.hash)
    if (target.sketch) await this.openSketch(target.sketch)
    if (target.link) {
      this.pendingLinkAnchor = target.link
      this.showBanner(`pick a sketch or marker to link with ${target.link}`)
    }
  }

  showBanner(text: string): void {
    this.banner.textContent = text
    this.banner.style.display = text ? 'block' : 'none'
  }

  wireUpload(): void {
    const input = $('#file-input') as HTMLInputElement
    $('#upload-button').addEventListener('click', async () => {
      const file = input.files?.[0]
      if (!file) {
        this.showBanner('choose or capture an image first')
        return
      }
      const annotation = ($('#upload-annotation') as HTMLInputElement).value
      const authors = ($('#upload-authors') as HTMLInputElement).value
        .split(',')
        .map((a) => a.trim())
        .filter(Boolean)
      try {
        const result = await uploadImage('', file, { annotation, authors })
        input.value = ''
        await this.refreshList()
        await this.openSketch(result.anchor)
      } catch (err) {
        this.showBanner(err instanceof Error ? err.message : String(err))
      }
    })
  }

  async refreshList(): Promise<void> {
    const result = await this.client.request<{ sketches: any[] }>('list_sketches')
    this.sketchList.replaceChildren(
      ...result.sketches.map((s) => {
        const item = document.createElement('li')
        const link = document.createElement('a')
        link.href = `#sketch=${s.anchor}`
        link.textContent = s.annotation || s.anchor
        link.addEventListener('click', (ev) => {
          ev.preventDefault()
          void this.openSketch(s.anchor)
        })
        const meta = document.createElement('span')
        meta.className = 'muted'
        meta.textContent = ` ${s.markers} markers`
        item.append(link, meta)
        return item
      }),
    )
  }

  async openSketch(anchor: string): Promise<void> {
    const result = await this.client.request<{ doc: DocJson }>('get_sketch', { anchor })
    this.current = result.doc
    this.selectedMarker = null
    window.location.hash = `sketch=${anchor}`
    this.image.src = result.doc.image_url
    if (this.image.complete) this.renderMarkers()
    else this.image.onload = () => this.renderMarkers()
    await this.renderDetail()
  }

  scale(): number {
    return this.current ? displayScale(this.image.clientWidth, this.current.width) : 1
  }

  renderMarkers(): void {
    const doc = this.current
    if (!doc) return
    const scale = this.scale()
    this.overlay.replaceChildren(
      ...doc.markers.map((m) => {
        const box = document.createElement('div')
        box.className = 'marker' + (m.anchor === this.selectedMarker ? ' selected' : '')
        const display = rectToDisplay(m, scale)
        box.style.left = `${display.x}px`
        box.style.top = `${display.y}px`
        box.style.width = `${display.w}px`
        box.style.height = `${display.h}px`
        // marker annotation wins over the sketch's when hovering
        box.title = m.annotation || doc.annotation
        box.addEventListener('click', (ev) => {
          ev.stopPropagation()
          this.selectedMarker = m.anchor
          this.renderMarkers()
          void this.renderDetail()
        })
        return box
      }),
    )
  }

  wireStage(): void {
    let drag: Drag | null = null
    let rubber: HTMLDivElement | null = null

    const stagePoint = (ev: MouseEvent) => {
      const bounds = this.image.getBoundingClientRect()
      return { x: ev.clientX - bounds.left, y: ev.clientY - bounds.top }
    }

    this.stage.addEventListener('mousedown', (ev) => {
      if (!this.current) return
      const point = stagePoint(ev as MouseEvent)
      drag = { x0: point.x, y0: point.y, x1: point.x, y1: point.y }
      rubber = document.createElement('div')
      rubber.className = 'rubber'
      this.overlay.append(rubber)
      ev.preventDefault()
    })
    this.stage.addEventListener('mousemove', (ev) => {
      if (!drag || !rubber) return
      const point = stagePoint(ev as MouseEvent)
      drag.x1 = point.x
      drag.y1 = point.y
      rubber.style.left = `${Math.min(drag.x0, drag.x1)}px`
      rubber.style.top = `${Math.min(drag.y0, drag.y1)}px`
      rubber.style.width = `${Math.abs(drag.x1 - drag.x0)}px`
      rubber.style.height = `${Math.abs(drag.y1 - drag.y0)}px`
    })
    this.stage.addEventListener('mouseup', async () => {
      if (!drag || !this.current) return
      rubber?.remove()
      rubber = null
      const finished = drag
      drag = null
      if (!isRealDrag(finished)) return // plain click: no marker request
      const rect = dragToImageRect(finished, this.scale())
      const problem = validateRect(rect, this.current.width, this.current.height)
      if (problem) {
        this.showBanner(problem)
        return
      }
      const annotation = window.prompt('Annotation for this marker?', '') ?? ''
      try {
        const result = await this.client.request<{ doc: DocJson; marker: MarkerJson }>(
          'add_marker',
          { sketch: this.current.anchor, rect, annotation },
        )
        this.current = result.doc
        this.selectedMarker = result.marker.anchor
        this.renderMarkers()
        await this.renderDetail()
        if (this.pendingLinkAnchor) await this.linkWith(this.pendingLinkAnchor)
      } catch (err) {
        this.showBanner(err instanceof Error ? err.message : String(err))
      }
    })
    window.addEventListener('resize', () => this.renderMarkers())
  }

  activeAnchor(): string | null {
    if (this.selectedMarker) return this.selectedMarker
    return this.current?.anchor ?? null
  }

  async linkWith(sourceAnchor: string): Promise<void> {
    const target = this.activeAnchor()
    if (!target) return
    try {
      await this.client.request('create_link', { a: target, b: sourceAnchor })
      this.pendingLinkAnchor = null
      this.showBanner('')
      await this.renderDetail()
    } catch (err) {
      this.showBanner(err instanceof ProtocolError ? `${err.code}: ${err.message}` : String(err))
    }
  }

  async renderDetail(): Promise<void> {
    const doc = this.current
    if (!doc) {
      this.detail.replaceChildren()
      return
    }
    const target = this.activeAnchor()!
    const isMarker = target !== doc.anchor
    const marker = doc.markers.find((m) => m.anchor === target)

    const fragment = document.createDocumentFragment()
    const heading = document.createElement('h2')
    heading.textContent = isMarker ? 'Marker' : 'Sketch'
    fragment.append(heading)

    const idLine = document.createElement('p')
    idLine.className = 'muted'
    idLine.textContent = target
    fragment.append(idLine)

    if (!isMarker && doc.authors.length) {
      const authors = document.createElement('p')
      authors.textContent = `authors: ${doc.authors.join(', ')}`
      fragment.append(authors)
    }

    const annotation = document.createElement('textarea')
    annotation.value = isMarker ? marker?.annotation ?? '' : doc.annotation
    annotation.rows = 2
    const saveButton = document.createElement('button')
    saveButton.textContent = 'Save annotation'
    saveButton.addEventListener('click', async () => {
      const result = await this.client.request<{ doc: DocJson }>('update_annotation', {
        sketch: doc.anchor,
        target,
        text: annotation.value,
      })
      this.current = result.doc
      this.renderMarkers()
    })
    fragment.append(annotation, saveButton)

    if (isMarker && marker) {
      const removeButton = document.createElement('button')
      removeButton.textContent = 'Remove marker'
      removeButton.addEventListener('click', async () => {
        const result = await this.client.request<{ doc: DocJson }>('remove_marker', {
          sketch: doc.anchor,
          marker: marker.anchor,
        })
        this.current = result.doc
        this.selectedMarker = null
        this.renderMarkers()
        await this.renderDetail()
      })
      fragment.append(removeButton)
    }

    const svgLink = document.createElement('a')
    svgLink.href = sketchSvgUrl('', doc.anchor)
    svgLink.textContent = 'raw SVG'
    svgLink.target = '_blank'
    fragment.append(svgLink)

    fragment.append(await this.linkSection(target))
    this.detail.replaceChildren(fragment)
  }

  async linkSection(target: string): Promise<HTMLElement> {
    const section = document.createElement('div')
    const heading = document.createElement('h3')
    heading.textContent = 'Links'
    section.append(heading)

    const result = await this.client.request<{ links: LinkEntry[] }>('query_links', {
      anchor: target,
    })
    const list = document.createElement('ul')
    for (const entry of result.links) {
      const item = document.createElement('li')
      if (entry.source) {
        item.textContent = `${entry.source.artifact_path || entry.source.path} (${entry.source.referent_kind}) `
        const go = document.createElement('button')
        go.textContent = 'navigate'
        go.addEventListener('click', async () => {
          try {
            await this.client.request('navigate', { anchor: entry.peer })
            this.showBanner('')
          } catch (err) {
            if (err instanceof ProtocolError && err.code === 'NoEditorConnected') {
              this.showBanner('no editor connected for that project')
            } else {
              this.showBanner(String(err))
            }
          }
        })
        item.append(go)
      } else {
        item.textContent = `${entry.peer_kind}: ${entry.sketch?.annotation || entry.peer}`
      }
      const unlinkButton = document.createElement('button')
      unlinkButton.textContent = 'unlink'
      unlinkButton.addEventListener('click', async () => {
        await this.client.request('remove_link', { a: target, b: entry.peer })
        await this.renderDetail()
      })
      item.append(unlinkButton)
      list.append(item)
    }
    if (!result.links.length) {
      const empty = document.createElement('li')
      empty.className = 'muted'
      empty.textContent = 'not linked yet'
      list.append(empty)
    }
    section.append(list)
    section.append(await this.pickerSection(target))
    return section
  }

  async pickerSection(target: string): Promise<HTMLElement> {
    const picker = document.createElement('div')
    picker.className = 'picker'
    const heading = document.createElement('h4')
    heading.textContent = 'Link to source artifact'
    picker.append(heading)

    const health = await fetch('/health').then((r) => r.json())
    const projects: string[] = health.projects ?? []
    const select = document.createElement('select')
    for (const name of projects) {
      const option = document.createElement('option')
      option.value = name
      option.textContent = name
      select.append(option)
    }
    const loadButton = document.createElement('button')
    loadButton.textContent = 'load artifacts'
    const artifactList = document.createElement('ul')
    loadButton.addEventListener('click', async () => {
      const tree = await this.client.request<any>('list_artifacts', { project: select.value })
      artifactList.replaceChildren()
      for (const file of tree.files) {
        for (const anchor of file.anchors) {
          const item = document.createElement('li')
          const pick = document.createElement('button')
          pick.textContent = 'link'
          pick.addEventListener('click', () => this.linkWith(anchor.anchor))
          item.append(
            pick,
            document.createTextNode(
              ` ${anchor.artifact_path || `${file.path}:${anchor.start}`} (${anchor.kind})`,
            ),
          )
          artifactList.append(item)
        }
      }
      if (!artifactList.children.length) {
        const empty = document.createElement('li')
        empty.className = 'muted'
        empty.textContent = 'no anchors in this project yet'
        artifactList.append(empty)
      }
    })
    picker.append(select, loadButton, artifactList)

    const manual = document.createElement('input')
    manual.placeholder = 'or paste a source anchor (0…)'
    const manualButton = document.createElement('button')
    manualButton.textContent = 'link anchor'
    manualButton.addEventListener('click', () => {
      if (manual.value.trim()) void this.linkWith(manual.value.trim())
    })
    picker.append(manual, manualButton)

    if (this.pendingLinkAnchor) {
      const pendingButton = document.createElement('button')
      pendingButton.textContent = `link with ${this.pendingLinkAnchor.slice(0, 13)}…`
      pendingButton.addEventListener('click', () => void this.linkWith(this.pendingLinkAnchor!))
      picker.append(pendingButton)
    }
    return picker
  }
}

new App().start().catch((err) => {
  document.body.textContent = `failed to start: ${err}`
})
